//! Finite-index subgroups and abelian invariants: Reidemeister–Schreier
//! rewriting, Smith normal form over arbitrary-precision integers, and the
//! infinite-order certificates built from them.
//!
//! A certificate for "`w` has infinite order in `G`" is a finite permutation
//! action of `G` (any finite quotient acting on itself), a power `s` with
//! `w^s` in the point stabilizer `H`, and an integer functional on the edges
//! of the action graph that sums to zero around every relator loop. Such a
//! functional is a homomorphism `H -> Z`; if it is nonzero on `w^s`, then
//! `w^s`, and hence `w`, has infinite order.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosets::{element_order_finite, enumerate_cosets, realize, transversal, CosetTable, FiniteRealization};
use crate::presentation::Presentation;
use crate::words::Word;

pub const CERTIFICATE_FORMAT: &str = "burnside-certificate/1";

/// Certificates are not attempted when the relation matrix would exceed this
/// many entries.
pub const MAX_CERTIFICATE_ENTRIES: usize = 4_000_000;

mod bigjson {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::Value;

    pub fn to_value(b: &BigInt) -> Value {
        match b.to_i64() {
            Some(v) => Value::from(v),
            None => Value::String(b.to_string()),
        }
    }

    pub fn from_value(v: &Value) -> Result<BigInt, String> {
        match v {
            Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| format!("bad integer {n}")),
            Value::String(s) => s.parse().map_err(|_| format!("bad integer {s:?}")),
            other => Err(format!("expected integer, got {other}")),
        }
    }

    pub mod one {
        use super::*;
        pub fn serialize<S: Serializer>(b: &BigInt, s: S) -> Result<S::Ok, S::Error> {
            serde::Serialize::serialize(&to_value(b), s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
            from_value(&Value::deserialize(d)?).map_err(D::Error::custom)
        }
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            serde::Serialize::serialize(&v.iter().map(to_value).collect::<Vec<_>>(), s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<Value>::deserialize(d)?.iter().map(|v| from_value(v).map_err(D::Error::custom)).collect()
        }
    }

    pub mod mat {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<Value>> = v.iter().map(|r| r.iter().map(to_value).collect()).collect();
            serde::Serialize::serialize(&rows, s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
            Vec::<Vec<Value>>::deserialize(d)?
                .iter()
                .map(|r| r.iter().map(|v| from_value(v).map_err(D::Error::custom)).collect())
                .collect()
        }
    }
}

/// Dense integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{:?}", self.to_rows())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, x) in r.iter().enumerate() {
                m.data[i * cols + j] = x.clone().into();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square matrices only.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for k in 0..self.cols {
                self.data.swap(i * self.cols + k, j * self.cols + k);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for k in 0..self.rows {
                self.data.swap(k * self.cols + i, k * self.cols + j);
            }
        }
    }

    /// row[i] -= q * row[t]
    fn row_axpy(&mut self, i: usize, t: usize, q: &BigInt) {
        for k in 0..self.cols {
            let v = &self.data[t * self.cols + k] * q;
            if !v.is_zero() {
                self.data[i * self.cols + k] -= v;
            }
        }
    }

    /// col[j] -= q * col[t]
    fn col_axpy(&mut self, j: usize, t: usize, q: &BigInt) {
        for k in 0..self.rows {
            let v = &self.data[k * self.cols + t] * q;
            if !v.is_zero() {
                self.data[k * self.cols + j] -= v;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for k in 0..self.cols {
            let v = -&self.data[i * self.cols + k];
            self.data[i * self.cols + k] = v;
        }
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        bigjson::mat::serialize(&self.to_rows(), s)
    }
}

/// `u * m * v = s` with `s` diagonal, `s[i][i] | s[i+1][i+1]`, nonnegative
/// diagonal, and `u`, `v` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.s.diagonal().iter().take_while(|d| !d.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (r, c) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        // pivot: smallest nonzero absolute value in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                let x = a.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..r {
                if !a.get(i, t).is_zero() {
                    let q = a.get(i, t) / a.get(t, t);
                    a.row_axpy(i, t, &q);
                    u.row_axpy(i, t, &q);
                    clean &= a.get(i, t).is_zero();
                }
            }
            for j in t + 1..c {
                if !a.get(t, j).is_zero() {
                    let q = a.get(t, j) / a.get(t, t);
                    a.col_axpy(j, t, &q);
                    v.col_axpy(j, t, &q);
                    clean &= a.get(t, j).is_zero();
                }
            }
            if !clean {
                // a remainder is smaller than the pivot; bring the smallest in
                let mut best = (t, t);
                for i in t + 1..r {
                    let x = a.get(i, t);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..c {
                    let x = a.get(t, j);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                a.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                a.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
                continue;
            }
            let pivot = a.get(t, t).clone();
            let bad_row = (t + 1..r).find(|&i| (t + 1..c).any(|j| !a.get(i, j).is_multiple_of(&pivot)));
            match bad_row {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    a.row_axpy(t, i, &minus_one);
                    u.row_axpy(t, i, &minus_one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { s: a, u, v }
}

/// Row per relator, column per generator, entries are exponent sums.
pub fn relation_matrix_abelianized(p: &Presentation) -> IntMatrix {
    let rows: Vec<Vec<i64>> = p.relators().iter().map(|r| r.exponent_sums(p.rank())).collect();
    IntMatrix::from_rows(p.rank(), &rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianInvariants {
    /// Invariant factors `d_1 | d_2 | ...`, each at least 2.
    #[serde(with = "bigjson::vec")]
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl AbelianInvariants {
    fn from_smith(sf: &SmithForm, ngens: usize) -> Self {
        let diag = sf.s.diagonal();
        let rank = sf.rank();
        AbelianInvariants {
            torsion: diag[..rank].iter().filter(|d| !d.is_one()).cloned().collect(),
            free_rank: ngens - rank,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Order of the group when finite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion.iter().product())
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".into() } else { format!("Z^{}", self.free_rank) });
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" x "))
        }
    }
}

pub fn abelian_invariants(p: &Presentation) -> AbelianInvariants {
    AbelianInvariants::from_smith(&smith_normal_form(&relation_matrix_abelianized(p)), p.rank())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubgroupError {
    #[error("coset table is not closed")]
    NotClosed,
    #[error("coset table does not satisfy the relators of the presentation")]
    NotACosetTable,
}

/// Schreier transversal and generators of a finite-index subgroup.
#[derive(Clone, Debug)]
pub struct SchreierData {
    table: CosetTable,
    pub transversal: Vec<Word>,
    /// `(coset, generator index)` of each non-tree edge, in table order.
    pub edges: Vec<(usize, usize)>,
    /// `t_c a_i t_{c a_i}^-1` for each non-tree edge.
    pub subgroup_generators: Vec<Word>,
    edge_slot: Vec<Option<usize>>,
}

pub fn schreier(p: &Presentation, t: &CosetTable) -> Result<SchreierData, SubgroupError> {
    if !t.is_closed() {
        return Err(SubgroupError::NotClosed);
    }
    if t.rank() != p.rank() || t.satisfies(p).is_err() {
        return Err(SubgroupError::NotACosetTable);
    }
    let reps = transversal(t);
    let m = p.rank();
    let mut edges = Vec::new();
    let mut gens = Vec::new();
    let mut edge_slot = vec![None; reps.len() * m];
    for (c, rep) in reps.iter().enumerate() {
        for g in 0..m {
            let d = t.act(c, 2 * g);
            let s = rep.concat(&Word::generator(g + 1)).concat(&reps[d].inverse());
            if !s.is_empty() {
                edge_slot[c * m + g] = Some(edges.len());
                edges.push((c, g));
                gens.push(s);
            }
        }
    }
    Ok(SchreierData { table: t.clone(), transversal: reps, edges, subgroup_generators: gens, edge_slot })
}

impl SchreierData {
    pub fn index(&self) -> usize {
        self.transversal.len()
    }

    pub fn generator_count(&self) -> usize {
        self.subgroup_generators.len()
    }

    /// Traces `w` from `start`, returning the end point and the Schreier
    /// letters `(generator, +-1)` crossed.
    fn trace_letters(&self, start: usize, w: &Word) -> (usize, Vec<(usize, i64)>) {
        let m = self.table.rank();
        let mut c = start;
        let mut out = Vec::new();
        for g in w.letters() {
            let gi = g.index() - 1;
            if g.is_inverse() {
                let d = self.table.act(c, g.code());
                if let Some(s) = self.edge_slot[d * m + gi] {
                    out.push((s, -1));
                }
                c = d;
            } else {
                if let Some(s) = self.edge_slot[c * m + gi] {
                    out.push((s, 1));
                }
                c = self.table.act(c, g.code());
            }
        }
        (c, out)
    }

    /// Expresses a subgroup element in the Schreier generators; `None` if `w`
    /// is not in the subgroup.
    pub fn rewrite(&self, w: &Word) -> Option<Vec<(usize, i64)>> {
        let (end, letters) = self.trace_letters(0, w);
        (end == 0).then_some(letters)
    }

    /// Evaluates a rewritten word back in the ambient free group.
    pub fn evaluate(&self, letters: &[(usize, i64)]) -> Word {
        letters.iter().fold(Word::identity(), |acc, &(s, e)| {
            let g = &self.subgroup_generators[s];
            acc.concat(&if e > 0 { g.clone() } else { g.inverse() })
        })
    }

    fn abelian_trace(&self, start: usize, w: &Word) -> (usize, Vec<i64>) {
        let (end, letters) = self.trace_letters(start, w);
        let mut v = vec![0i64; self.generator_count()];
        for (s, e) in letters {
            v[s] += e;
        }
        (end, v)
    }

    /// Reidemeister–Schreier relators of the subgroup, abelianized: one row per
    /// (coset, relator).
    pub fn abelianized_relators(&self, p: &Presentation) -> IntMatrix {
        let rows: Vec<Vec<i64>> = (0..self.index())
            .flat_map(|c| p.relators().iter().map(move |r| (c, r)))
            .map(|(c, r)| self.abelian_trace(c, r).1)
            .collect();
        IntMatrix::from_rows(self.generator_count(), &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("the given finite group is not a quotient of the presentation")]
    NotAQuotient,
    #[error("no certificate: the image of the power is torsion in the kernel abelianization")]
    NotFound,
    #[error("relation matrix too large ({0} entries)")]
    TooLarge(usize),
    #[error("invalid certificate: {0}")]
    Invalid(String),
}

/// Self-contained evidence that `word` has infinite order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub presentation: Presentation,
    pub word: Word,
    /// Degree of the action (order of the finite quotient).
    pub quotient_order: usize,
    /// `action[i][c]` is the image of point `c` under generator `i + 1`.
    pub action: Vec<Vec<u32>>,
    /// Order of the image of `word` in the quotient.
    pub power: u64,
    pub transversal: Vec<Word>,
    pub schreier_generators: Vec<Word>,
    pub kernel_invariants: AbelianInvariants,
    /// Abelianized Reidemeister–Schreier relators over the Schreier generators.
    #[serde(with = "bigjson::mat")]
    pub relation_matrix: Vec<Vec<BigInt>>,
    /// `word^power` in Schreier-generator coordinates.
    #[serde(with = "bigjson::vec")]
    pub power_vector: Vec<BigInt>,
    /// `functional[c][i]`: value on the edge leaving point `c` along generator `i + 1`.
    #[serde(with = "bigjson::mat")]
    pub functional: Vec<Vec<BigInt>>,
    /// Value of the functional on `word^power`; nonzero.
    #[serde(with = "bigjson::one")]
    pub pairing: BigInt,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CertificateError> {
        serde_json::from_str(text).map_err(|e| CertificateError::Invalid(e.to_string()))
    }
}

/// The one-element group, as a quotient of any presentation.
pub fn trivial_quotient(p: &Presentation) -> FiniteRealization {
    FiniteRealization::from_regular_action(p, &vec![vec![0]; p.rank()]).expect("trivial group is a quotient")
}

/// The abelianization of `p` with every free factor replaced by `Z/q`
/// (`q = 0` keeps it as is). `None` if the result is infinite or has more
/// than `max_order` elements.
pub fn abelian_quotient(p: &Presentation, q: u64, max_order: usize) -> Option<FiniteRealization> {
    let m = p.rank();
    let sf = smith_normal_form(&relation_matrix_abelianized(p));
    let rank = sf.rank();
    let mut moduli: Vec<u64> = Vec::new();
    let mut coords: Vec<usize> = Vec::new();
    for i in 0..m {
        let d = if i < rank { sf.s.get(i, i).to_u64()? } else { q };
        if d == 0 {
            return None;
        }
        if d > 1 {
            moduli.push(d);
            coords.push(i);
        }
    }
    let order = moduli.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))?;
    if order > max_order {
        return None;
    }
    // generator j maps to row j of V, reduced coordinatewise
    let images: Vec<Vec<u64>> = (0..m)
        .map(|j| {
            coords
                .iter()
                .zip(&moduli)
                .map(|(&i, &d)| sf.v.get(j, i).mod_floor(&BigInt::from(d)).to_u64().unwrap())
                .collect()
        })
        .collect();
    let encode = |digits: &[u64]| digits.iter().zip(&moduli).fold(0usize, |acc, (&x, &d)| acc * d as usize + x as usize);
    let decode = |mut k: usize| {
        let mut digits = vec![0u64; moduli.len()];
        for i in (0..moduli.len()).rev() {
            digits[i] = (k % moduli[i] as usize) as u64;
            k /= moduli[i] as usize;
        }
        digits
    };
    let perms: Vec<Vec<u32>> = images
        .iter()
        .map(|img| {
            (0..order)
                .map(|k| {
                    let digits: Vec<u64> = decode(k).iter().zip(img).zip(&moduli).map(|((x, y), d)| (x + y) % d).collect();
                    encode(&digits) as u32
                })
                .collect()
        })
        .collect();
    FiniteRealization::from_regular_action(p, &perms).ok()
}

/// `[x, y] = x y x^-1 y^-1`
pub fn commutator(x: &Word, y: &Word) -> Word {
    x.concat(y).concat(&x.inverse()).concat(&y.inverse())
}

/// `G / gamma_{c+1}(G)` for `c = class`: coset enumeration of `p` with every
/// left-normed commutator of weight `class + 1` in the generators added as a
/// relator. `None` if the enumeration does not close within `max_cosets`.
pub fn lower_central_quotient(p: &Presentation, class: usize, max_cosets: usize) -> Option<FiniteRealization> {
    let gens: Vec<Word> = (1..=p.rank()).map(Word::generator).collect();
    let mut level = gens.clone();
    for _ in 0..class {
        level = level.iter().flat_map(|x| gens.iter().map(move |g| commutator(x, g))).filter(|x| !x.is_empty()).collect();
    }
    level.sort();
    level.dedup();
    let mut q = p.clone();
    for r in level {
        q = q.with_relator(r).ok()?;
    }
    realize(&q, &enumerate_cosets(&q, &[], max_cosets)).ok()
}

/// The abelianized kernel of a finite quotient of `p`: Schreier data of the
/// regular action and the Smith form of its Reidemeister–Schreier relators.
/// Independent of any particular word, so it is built once and reused.
#[derive(Clone, Debug)]
pub struct KernelAbelianization {
    presentation: Presentation,
    quotient: FiniteRealization,
    schreier: SchreierData,
    relations: IntMatrix,
    smith: SmithForm,
}

impl KernelAbelianization {
    pub fn new(p: &Presentation, quotient: &FiniteRealization) -> Result<Self, CertificateError> {
        if !quotient.is_quotient_of(p) {
            return Err(CertificateError::NotAQuotient);
        }
        let sd = schreier(p, quotient.table()).map_err(|_| CertificateError::NotAQuotient)?;
        let entries = sd.index() * p.relators().len() * sd.generator_count();
        if entries > MAX_CERTIFICATE_ENTRIES {
            return Err(CertificateError::TooLarge(entries));
        }
        let relations = sd.abelianized_relators(p);
        let smith = smith_normal_form(&relations);
        Ok(KernelAbelianization { presentation: p.clone(), quotient: quotient.clone(), schreier: sd, relations, smith })
    }

    pub fn invariants(&self) -> AbelianInvariants {
        AbelianInvariants::from_smith(&self.smith, self.schreier.generator_count())
    }

    pub fn quotient(&self) -> &FiniteRealization {
        &self.quotient
    }

    pub fn certificate(&self, w: &Word) -> Result<Certificate, CertificateError> {
        let sd = &self.schreier;
        let k = sd.generator_count();
        let s = element_order_finite(&self.quotient, w);
        let (end, v) = sd.abelian_trace(0, &w.pow(s as usize));
        debug_assert_eq!(end, 0);
        let rank = self.smith.rank();
        if rank == k {
            return Err(CertificateError::NotFound);
        }
        let v_big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        let sv = &self.smith.v;
        let j = (rank..k)
            .find(|&j| !(0..k).fold(BigInt::zero(), |acc, i| acc + &v_big[i] * sv.get(i, j)).is_zero())
            .ok_or(CertificateError::NotFound)?;
        let mut phi: Vec<BigInt> = (0..k).map(|i| sv.get(i, j).clone()).collect();
        let g = phi.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if !g.is_zero() && !g.is_one() {
            phi.iter_mut().for_each(|x| *x = &*x / &g);
        }
        let pairing: BigInt = v_big.iter().zip(&phi).map(|(a, b)| a * b).sum();
        debug_assert!(!pairing.is_zero());
        let mut functional = vec![vec![BigInt::zero(); self.presentation.rank()]; sd.index()];
        for (slot, &(c, gi)) in sd.edges.iter().enumerate() {
            functional[c][gi] = phi[slot].clone();
        }
        let cert = Certificate {
            format: CERTIFICATE_FORMAT.to_string(),
            presentation: self.presentation.clone(),
            word: w.clone(),
            quotient_order: self.quotient.order(),
            action: self.quotient.table().generator_perms(),
            power: s,
            transversal: sd.transversal.clone(),
            schreier_generators: sd.subgroup_generators.clone(),
            kernel_invariants: self.invariants(),
            relation_matrix: self.relations.to_rows(),
            power_vector: v_big,
            functional,
            pairing,
        };
        debug_assert_eq!(verify_certificate(&cert), Ok(()));
        Ok(cert)
    }
}

/// Tries to certify that `w` has infinite order using the action of `G` on
/// the finite quotient `quotient`.
pub fn infinite_order_certificate(
    p: &Presentation,
    w: &Word,
    quotient: &FiniteRealization,
) -> Result<Certificate, CertificateError> {
    KernelAbelianization::new(p, quotient)?.certificate(w)
}

/// Checks a certificate from its raw data alone: the action satisfies the
/// relators, `word^power` fixes point 0, the functional vanishes on every
/// relator loop, and it is nonzero on `word^power`.
pub fn verify_certificate(cert: &Certificate) -> Result<(), CertificateError> {
    let bad = |msg: &str| Err(CertificateError::Invalid(msg.to_string()));
    if cert.format != CERTIFICATE_FORMAT {
        return bad("unknown format");
    }
    let p = &cert.presentation;
    let m = p.rank();
    let n = cert.quotient_order;
    if cert.action.len() != m || cert.functional.len() != n || cert.functional.iter().any(|r| r.len() != m) {
        return bad("dimension mismatch");
    }
    let mut inverse = vec![vec![u32::MAX; n]; m];
    for (g, perm) in cert.action.iter().enumerate() {
        if perm.len() != n {
            return bad("action has the wrong degree");
        }
        for (c, &d) in perm.iter().enumerate() {
            if d as usize >= n || inverse[g][d as usize] != u32::MAX {
                return bad("action is not a permutation");
            }
            inverse[g][d as usize] = c as u32;
        }
    }
    // walks a word from a point, summing the functional along the way
    let walk = |start: usize, w: &Word| -> (usize, BigInt) {
        let mut c = start;
        let mut total = BigInt::zero();
        for l in w.letters() {
            let g = l.index() - 1;
            if l.is_inverse() {
                c = inverse[g][c] as usize;
                total -= &cert.functional[c][g];
            } else {
                total += &cert.functional[c][g];
                c = cert.action[g][c] as usize;
            }
        }
        (c, total)
    };
    for r in p.relators() {
        for c in 0..n {
            let (end, total) = walk(c, r);
            if end != c {
                return bad("a relator does not act trivially");
            }
            if !total.is_zero() {
                return bad("functional does not vanish on a relator loop");
            }
        }
    }
    if cert.power == 0 {
        return bad("power must be positive");
    }
    let (end, total) = walk(0, &cert.word.pow(cert.power as usize));
    if end != 0 {
        return bad("word^power does not fix the base point");
    }
    if total.is_zero() || total != cert.pairing {
        return bad("functional does not pair nontrivially with word^power");
    }
    Ok(())
}
