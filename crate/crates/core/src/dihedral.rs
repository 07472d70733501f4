//! Small finite groups as multiplication tables: dihedral groups, direct
//! products, subgroup enumeration, and an exhaustive search for embeddings
//! into `D_{2n} x (D_{2^{k+1}})^r` where `n = 2^k n_0` with `n_0` odd.
//!
//! Direct products are kept as lists of factors and multiplied componentwise,
//! so a product of order `2^16` costs no more memory than its factors.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosets::FiniteRealization;

pub const MAX_TABLE_ORDER: usize = 1 << 16;

/// Dense tables above this order are trusted rather than checked for associativity.
const ASSOCIATIVITY_CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DihedralError {
    #[error("group order {0} exceeds the table budget {MAX_TABLE_ORDER}")]
    BudgetExceeded(usize),
    #[error("not a group table: {0}")]
    NotAGroup(String),
    #[error("subset is not a subgroup")]
    NotASubgroup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    /// Row-major multiplication table; element 0 is the identity.
    Dense { mult: Vec<u32>, inv: Vec<u32> },
    /// Mixed-radix tuples, first factor most significant.
    Product { factors: Vec<FiniteGroupTable> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    order: usize,
    repr: Repr,
}

impl FiniteGroupTable {
    /// Checks closure, identity (must be element 0), inverses and, for small
    /// tables, associativity.
    pub fn from_mult(order: usize, mult: Vec<u32>) -> Result<Self, DihedralError> {
        if order == 0 || order > MAX_TABLE_ORDER {
            return Err(DihedralError::BudgetExceeded(order));
        }
        if mult.len() != order * order || mult.iter().any(|&x| x as usize >= order) {
            return Err(DihedralError::NotAGroup("table has the wrong shape".into()));
        }
        let at = |a: usize, b: usize| mult[a * order + b] as usize;
        if (0..order).any(|a| at(0, a) != a || at(a, 0) != a) {
            return Err(DihedralError::NotAGroup("element 0 is not the identity".into()));
        }
        let mut inv = vec![0u32; order];
        for a in 0..order {
            match (0..order).find(|&b| at(a, b) == 0) {
                Some(b) if at(b, a) == 0 => inv[a] = b as u32,
                _ => return Err(DihedralError::NotAGroup(format!("element {a} has no inverse"))),
            }
        }
        if order <= ASSOCIATIVITY_CHECK_LIMIT {
            for a in 0..order {
                for b in 0..order {
                    let ab = at(a, b);
                    for c in 0..order {
                        if at(ab, c) != at(a, at(b, c)) {
                            return Err(DihedralError::NotAGroup(format!("({a}*{b})*{c} != {a}*({b}*{c})")));
                        }
                    }
                }
            }
        }
        Ok(FiniteGroupTable { order, repr: Repr::Dense { mult, inv } })
    }

    fn dense_unchecked(order: usize, mult: Vec<u32>) -> Self {
        let inv = (0..order)
            .map(|a| (0..order).find(|&b| mult[a * order + b] == 0).expect("group table") as u32)
            .collect();
        FiniteGroupTable { order, repr: Repr::Dense { mult, inv } }
    }

    /// Multiplication table of a group realized by coset enumeration.
    pub fn from_realization(r: &FiniteRealization) -> Result<Self, DihedralError> {
        let n = r.order();
        if n > MAX_TABLE_ORDER {
            return Err(DihedralError::BudgetExceeded(n));
        }
        let mut mult = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mult.push(r.mul(a, b) as u32);
            }
        }
        Ok(Self::dense_unchecked(n, mult))
    }

    pub fn cyclic(n: usize) -> Self {
        let mult = (0..n).flat_map(|a| (0..n).map(move |b| ((a + b) % n) as u32)).collect();
        Self::dense_unchecked(n, mult)
    }

    /// Quaternion group: `+-1, +-i, +-j, +-k` encoded as `basis + 4 * sign`
    /// with basis `1, i, j, k` = `0..4`.
    pub fn quaternion() -> Self {
        let decode = |e: usize| -> (u8, u8) { ((e >> 2) as u8, (e & 3) as u8) };
        let encode = |s: u8, b: u8| (b as usize) | ((s as usize) << 2);
        // unit quaternion products of basis elements: (sign, basis)
        const T: [[(u8, u8); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let mut mult = Vec::with_capacity(64);
        for a in 0..8 {
            for b in 0..8 {
                let ((sa, ba), (sb, bb)) = (decode(a), decode(b));
                let (s, basis) = T[ba as usize][bb as usize];
                mult.push(encode((sa + sb + s) % 2, basis) as u32);
            }
        }
        Self::dense_unchecked(8, mult)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    fn split(factors: &[FiniteGroupTable], mut x: usize) -> Vec<usize> {
        let mut parts = vec![0; factors.len()];
        for (i, f) in factors.iter().enumerate().rev() {
            parts[i] = x % f.order;
            x /= f.order;
        }
        parts
    }

    fn join(factors: &[FiniteGroupTable], parts: &[usize]) -> usize {
        factors.iter().zip(parts).fold(0, |acc, (f, &p)| acc * f.order + p)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.repr {
            Repr::Dense { mult, .. } => mult[a * self.order + b] as usize,
            Repr::Product { factors } => {
                let (pa, pb) = (Self::split(factors, a), Self::split(factors, b));
                let parts: Vec<usize> = factors.iter().enumerate().map(|(i, f)| f.mul(pa[i], pb[i])).collect();
                Self::join(factors, &parts)
            }
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match &self.repr {
            Repr::Dense { inv, .. } => inv[a] as usize,
            Repr::Product { factors } => {
                let parts: Vec<usize> = factors.iter().zip(Self::split(factors, a)).map(|(f, p)| f.inv(p)).collect();
                Self::join(factors, &parts)
            }
        }
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Number of elements of each order.
    pub fn order_spectrum(&self) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for a in 0..self.order {
            *out.entry(self.element_order(a)).or_insert(0) += 1;
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([0usize]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// A generating set built greedily, each step taking the element that
    /// enlarges the generated subgroup most.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut current = vec![0usize];
        while current.len() < self.order {
            let inside: BTreeSet<usize> = current.iter().copied().collect();
            let mut best: Option<(usize, Vec<usize>)> = None;
            for x in (0..self.order).filter(|x| !inside.contains(x)) {
                let mut trial = gens.clone();
                trial.push(x);
                let h = self.generated_subgroup(&trial);
                if best.as_ref().is_none_or(|(_, b)| h.len() > b.len()) {
                    let full = h.len() == self.order;
                    best = Some((x, h));
                    if full {
                        break;
                    }
                }
            }
            let (x, h) = best.expect("a missing element exists");
            gens.push(x);
            current = h;
        }
        gens
    }

    /// Every subgroup, as sorted element lists in order of size then content.
    /// Built by joining cyclic subgroups until nothing new appears.
    pub fn all_subgroups(&self) -> Vec<Vec<usize>> {
        let mut subgroups: BTreeSet<Vec<usize>> = (0..self.order).map(|a| self.generated_subgroup(&[a])).collect();
        let cyclic: Vec<Vec<usize>> = subgroups.iter().cloned().collect();
        let mut frontier: Vec<Vec<usize>> = cyclic.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                for c in &cyclic {
                    if c.len() > 1 && !c.iter().all(|x| h.binary_search(x).is_ok()) {
                        let mut gens = h.clone();
                        gens.extend(c.iter().copied());
                        let j = self.generated_subgroup(&gens);
                        if subgroups.insert(j.clone()) {
                            next.push(j);
                        }
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<Vec<usize>> = subgroups.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    pub fn is_cyclic_subgroup(&self, elems: &[usize]) -> bool {
        elems.iter().any(|&a| self.element_order(a) as usize == elems.len())
    }

    /// The subgroup on `elems` (which must contain the identity and be
    /// closed) as a table of its own, elements renumbered in the given order
    /// with the identity moved to the front.
    pub fn subgroup_table(&self, elems: &[usize]) -> Result<FiniteGroupTable, DihedralError> {
        let mut list: Vec<usize> = vec![0];
        list.extend(elems.iter().copied().filter(|&x| x != 0));
        if list.len() != elems.len() {
            return Err(DihedralError::NotASubgroup);
        }
        let index: BTreeMap<usize, u32> = list.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        let mut mult = Vec::with_capacity(list.len() * list.len());
        for &a in &list {
            for &b in &list {
                mult.push(*index.get(&self.mul(a, b)).ok_or(DihedralError::NotASubgroup)?);
            }
        }
        Ok(Self::dense_unchecked(list.len(), mult))
    }

    /// CSV with header `g,0,1,...`; row `a` lists the products `a*b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g");
        for b in 0..self.order {
            let _ = write!(out, ",{b}");
        }
        out.push('\n');
        for a in 0..self.order {
            let _ = write!(out, "{a}");
            for b in 0..self.order {
                let _ = write!(out, ",{}", self.mul(a, b));
            }
            out.push('\n');
        }
        out
    }
}

impl FiniteGroupTable {
    /// Parses the format written by [`FiniteGroupTable::to_csv`]; the table is
    /// checked like [`FiniteGroupTable::from_mult`].
    pub fn from_csv(text: &str) -> Result<Self, DihedralError> {
        let bad = |msg: String| DihedralError::NotAGroup(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty table".into()))?;
        let order = header.split(',').count().saturating_sub(1);
        if order > MAX_TABLE_ORDER {
            return Err(DihedralError::BudgetExceeded(order));
        }
        let mut mult = Vec::with_capacity(order * order);
        for (row, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != order + 1 || cells[0] != row.to_string() {
                return Err(bad(format!("row {row} is malformed")));
            }
            for c in &cells[1..] {
                mult.push(c.parse::<u32>().map_err(|_| bad(format!("bad entry {c:?} in row {row}")))?);
            }
        }
        Self::from_mult(order, mult)
    }
}

/// `D_{2h} = <r, s | r^h, s^2, (sr)^2>` of order `2h`; element `r^i s^j` is `2i + j`.
pub fn build_dihedral(h: usize) -> FiniteGroupTable {
    assert!(h >= 1, "dihedral parameter must be positive");
    let n = 2 * h;
    let mut mult = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let (i, j) = (a / 2, a % 2);
            let (k, l) = (b / 2, b % 2);
            // r^i s^j r^k s^l = r^(i + (-1)^j k) s^(j+l)
            let rot = if j == 0 { (i + k) % h } else { (i + h - k % h) % h };
            mult.push((2 * rot + (j ^ l)) as u32);
        }
    }
    FiniteGroupTable::dense_unchecked(n, mult)
}

pub fn direct_product(gs: &[FiniteGroupTable]) -> Result<FiniteGroupTable, DihedralError> {
    let order = gs.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.order)).unwrap_or(usize::MAX);
    if order > MAX_TABLE_ORDER {
        return Err(DihedralError::BudgetExceeded(order));
    }
    Ok(FiniteGroupTable { order, repr: Repr::Product { factors: gs.to_vec() } })
}

/// Least common multiple of the element orders.
pub fn exponent(g: &FiniteGroupTable) -> u64 {
    match &g.repr {
        Repr::Product { factors } => factors.iter().fold(1, |acc, f| acc.lcm(&exponent(f))),
        Repr::Dense { .. } => (0..g.order).fold(1, |acc, a| acc.lcm(&g.element_order(a))),
    }
}

/// The target `D_{2n} x (D_{2^{k+1}})^copies` with `2^k` the 2-part of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DihedralProductSpec {
    pub n: u64,
    pub k: u32,
    pub copies: usize,
}

impl DihedralProductSpec {
    pub fn new(n: u64, copies: usize) -> Self {
        assert!(n >= 1, "exponent must be positive");
        DihedralProductSpec { n, k: n.trailing_zeros(), copies }
    }

    pub fn factors(&self) -> Vec<FiniteGroupTable> {
        let mut out = vec![build_dihedral(self.n as usize)];
        out.extend(std::iter::repeat_n(build_dihedral(1 << self.k), self.copies));
        out
    }

    pub fn target(&self) -> Result<FiniteGroupTable, DihedralError> {
        direct_product(&self.factors())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub spec: DihedralProductSpec,
    pub factor_orders: Vec<usize>,
    /// `images[g]` is the image of element `g`, one component per factor.
    pub images: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum EmbedOutcome {
    Embedding(Embedding),
    /// Every homomorphism into every target with `copies <= r_max` was examined.
    NotFound { r_max: usize },
    /// A necessary condition fails for every target.
    Refuted { reason: String },
    BudgetExhausted { r_reached: usize, steps: u64 },
}

impl EmbedOutcome {
    pub fn is_embedding(&self) -> bool {
        matches!(self, EmbedOutcome::Embedding(_))
    }
}

/// Checks that `e` is an injective homomorphism from `h`.
pub fn verify_embedding(h: &FiniteGroupTable, e: &Embedding) -> bool {
    let factors = e.spec.factors();
    if e.images.len() != h.order || factors.iter().map(|f| f.order).collect::<Vec<_>>() != e.factor_orders {
        return false;
    }
    let distinct: BTreeSet<&Vec<usize>> = e.images.iter().collect();
    if distinct.len() != h.order {
        return false;
    }
    (0..h.order).all(|a| {
        (0..h.order).all(|b| {
            let ab = &e.images[h.mul(a, b)];
            factors.iter().enumerate().all(|(i, f)| ab[i] == f.mul(e.images[a][i], e.images[b][i]))
        })
    })
}

struct Budget {
    steps: u64,
    limit: u64,
}

impl Budget {
    fn spend(&mut self, n: u64) -> bool {
        self.steps += n;
        self.steps <= self.limit
    }
}

/// All homomorphisms `h -> f`, one per distinct kernel, as element image
/// vectors. `None` if the budget ran out.
fn homs_by_kernel(
    h: &FiniteGroupTable,
    gens: &[usize],
    tree: &[(usize, usize)],
    f: &FiniteGroupTable,
    budget: &mut Budget,
) -> Option<Vec<(Vec<bool>, Vec<usize>)>> {
    let gen_orders: Vec<u64> = gens.iter().map(|&g| h.element_order(g)).collect();
    let options: Vec<Vec<usize>> =
        gen_orders.iter().map(|&o| (0..f.order).filter(|&x| o % f.element_order(x) == 0).collect()).collect();
    let mut out: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    let mut choice = vec![0usize; gens.len()];
    loop {
        if !budget.spend(h.order as u64) {
            return None;
        }
        let imgs: Vec<usize> = choice.iter().enumerate().map(|(i, &c)| options[i][c]).collect();
        if let Some(phi) = extend_hom(h, gens, tree, f, &imgs) {
            let kernel: Vec<bool> = phi.iter().map(|&x| x == 0).collect();
            out.entry(kernel).or_insert(phi);
        }
        // odometer
        let mut i = gens.len();
        loop {
            if i == 0 {
                return Some(out.into_iter().collect());
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Spanning tree of the Cayley graph of `h`: `tree[x] = (parent, generator slot)`.
fn cayley_tree(h: &FiniteGroupTable, gens: &[usize]) -> Vec<(usize, usize)> {
    let mut tree = vec![(usize::MAX, 0); h.order];
    tree[0] = (0, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (i, &g) in gens.iter().enumerate() {
            let y = h.mul(x, g);
            if tree[y].0 == usize::MAX {
                tree[y] = (x, i);
                queue.push_back(y);
            }
        }
    }
    tree
}

fn extend_hom(h: &FiniteGroupTable, gens: &[usize], tree: &[(usize, usize)], f: &FiniteGroupTable, imgs: &[usize]) -> Option<Vec<usize>> {
    let mut phi = vec![usize::MAX; h.order];
    phi[0] = 0;
    // resolve along the tree; parents are reached first in breadth-first order
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (i, &g) in gens.iter().enumerate() {
            let y = h.mul(x, g);
            if tree[y] == (x, i) && y != 0 {
                phi[y] = f.mul(phi[x], imgs[i]);
                queue.push_back(y);
            }
        }
    }
    for x in 0..h.order {
        for (i, &g) in gens.iter().enumerate() {
            if phi[h.mul(x, g)] != f.mul(phi[x], imgs[i]) {
                return None;
            }
        }
    }
    Some(phi)
}

/// Searches for an injective homomorphism from `h` into
/// `D_{2n} x (D_{2^{k+1}})^r` for `r = 0, 1, ..., r_max`.
///
/// Homomorphisms into a direct product are tuples of homomorphisms into the
/// factors, and the tuple is injective exactly when the factor kernels
/// intersect trivially, so the search runs over kernels factor by factor.
pub fn embed_search(h: &FiniteGroupTable, spec: DihedralProductSpec, r_max: usize, step_budget: u64) -> EmbedOutcome {
    // necessary conditions shared by every target
    let big = build_dihedral(spec.n as usize);
    let small = build_dihedral(1 << spec.k);
    let target_exponent = exponent(&big).lcm(&exponent(&small));
    let he = exponent(h);
    if !target_exponent.is_multiple_of(he) {
        return EmbedOutcome::Refuted {
            reason: format!("exponent {he} does not divide the target exponent {target_exponent}"),
        };
    }
    let target_orders: BTreeSet<u64> = (1..=target_exponent).filter(|d| target_exponent.is_multiple_of(*d)).collect();
    if let Some(o) = h.order_spectrum().keys().find(|o| !target_orders.contains(o)) {
        return EmbedOutcome::Refuted { reason: format!("no element of order {o} in any target") };
    }

    let gens = h.generating_set();
    let tree = cayley_tree(h, &gens);
    let mut budget = Budget { steps: 0, limit: step_budget };
    let Some(big_homs) = homs_by_kernel(h, &gens, &tree, &big, &mut budget) else {
        return EmbedOutcome::BudgetExhausted { r_reached: 0, steps: budget.steps };
    };
    let Some(small_homs) = homs_by_kernel(h, &gens, &tree, &small, &mut budget) else {
        return EmbedOutcome::BudgetExhausted { r_reached: 0, steps: budget.steps };
    };

    for r in 0..=r_max {
        let s = DihedralProductSpec { copies: r, ..spec };
        if s.target().is_err() {
            return EmbedOutcome::BudgetExhausted { r_reached: r, steps: budget.steps };
        }
        for (kb, phib) in &big_homs {
            let mut chosen = Vec::new();
            match pick_kernels(kb, &small_homs, 0, r, &mut chosen, &mut budget) {
                Pick::Found => {
                    // pad unused factors with the first homomorphism
                    chosen.extend(std::iter::repeat_n(0, r - chosen.len()));
                    let images = (0..h.order)
                        .map(|g| std::iter::once(phib[g]).chain(chosen.iter().map(|&j| small_homs[j].1[g])).collect())
                        .collect();
                    let e = Embedding { spec: s, factor_orders: s.factors().iter().map(|f| f.order).collect(), images };
                    debug_assert!(verify_embedding(h, &e));
                    return EmbedOutcome::Embedding(e);
                }
                Pick::None => {}
                Pick::OutOfBudget => return EmbedOutcome::BudgetExhausted { r_reached: r, steps: budget.steps },
            }
        }
    }
    EmbedOutcome::NotFound { r_max }
}

enum Pick {
    Found,
    None,
    OutOfBudget,
}

/// Chooses at most `left` further kernels (indices nondecreasing from
/// `from`) so that the running intersection becomes trivial.
fn pick_kernels(
    current: &[bool],
    homs: &[(Vec<bool>, Vec<usize>)],
    from: usize,
    left: usize,
    chosen: &mut Vec<usize>,
    budget: &mut Budget,
) -> Pick {
    if current.iter().skip(1).all(|&in_kernel| !in_kernel) {
        return Pick::Found;
    }
    if left == 0 {
        return Pick::None;
    }
    for j in from..homs.len() {
        if !budget.spend(current.len() as u64) {
            return Pick::OutOfBudget;
        }
        let next: Vec<bool> = current.iter().zip(&homs[j].0).map(|(&a, &b)| a && b).collect();
        if next == current {
            continue;
        }
        chosen.push(j);
        match pick_kernels(&next, homs, j, left - 1, chosen, budget) {
            Pick::None => {
                chosen.pop();
            }
            other => return other,
        }
    }
    Pick::None
}
