//! Element orders in finitely presented groups.
//!
//! Strategies run in a fixed cascade, each with its own budget:
//! 1. coset enumeration over the trivial subgroup (exact when it closes),
//! 2. Knuth–Bendix completion followed by reducing successive powers,
//! 3. infinite-order certificates over a ladder of finite quotients,
//! 4. otherwise `Unknown`.
//!
//! `Finite` and `Infinite` verdicts are never wrong. Everything that depends
//! only on the presentation lives in [`GroupContext`], which is built once and
//! can be shared by threads evaluating many words.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::cosets::{element_order_finite, enumerate_cosets, realize, EnumerationStats, FiniteRealization, DEFAULT_MAX_COSETS};
use crate::presentation::Presentation;
use crate::rewrite::{finite_order_by_powers, knuth_bendix, rules_from_presentation, KbBudget, KbStats, PowerOrder, RewritingSystem};
use crate::subgrp::{abelian_invariants, abelian_quotient, lower_central_quotient, trivial_quotient, AbelianInvariants, Certificate, CertificateError, KernelAbelianization};
use crate::words::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_cosets: usize,
    pub kb: KbBudget,
    /// Largest abelian quotient put on the certificate ladder.
    pub max_quotient_order: usize,
    /// Powers up to `power_factor * n_hint` are reduced, capped at `max_powers`.
    pub power_factor: u64,
    pub max_powers: u64,
    /// Lower central quotients up to this class join the ladder when the
    /// abelianization is finite.
    pub max_class: usize,
    /// Coset budget for building each lower central quotient.
    pub quotient_cosets: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_cosets: DEFAULT_MAX_COSETS, kb: KbBudget::default(), max_quotient_order: 4096, power_factor: 4, max_powers: 4096, max_class: 3, quotient_cosets: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EnumerationOutcome {
    Closed { order: usize, stats: EnumerationStats },
    Exhausted { max_cosets: usize, stats: EnumerationStats },
    /// Not attempted: the abelianization is infinite, so enumeration over the
    /// trivial subgroup cannot close.
    Skipped { free_rank: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum FiniteEvidence {
    /// Order read off the regular permutation representation.
    CosetEnumeration { group_order: usize },
    /// `w^power` rewrites to the identity. `exact` holds when no smaller power
    /// can be trivial: either the system is confluent or the quotient named in
    /// `exact_in` already sees order `power`.
    PowerReduction { power: u64, confluent: bool, rules: usize, exact: bool, exact_in: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub strategy: String,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OrderVerdict {
    /// `order` divides into the true order exactly when the evidence says so;
    /// in every case `w^order = 1`.
    Finite { order: u64, evidence: FiniteEvidence },
    Infinite { quotient: String, certificate: Box<Certificate> },
    Unknown { attempts: Vec<Attempt> },
}

impl OrderVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, OrderVerdict::Finite { .. })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, OrderVerdict::Infinite { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, OrderVerdict::Unknown { .. })
    }

    pub fn finite_order(&self) -> Option<u64> {
        match self {
            OrderVerdict::Finite { order, .. } => Some(*order),
            _ => None,
        }
    }

    /// Is the reported finite order proven to be the exact order?
    pub fn is_exact(&self) -> bool {
        match self {
            OrderVerdict::Finite { evidence: FiniteEvidence::CosetEnumeration { .. }, .. } => true,
            OrderVerdict::Finite { evidence: FiniteEvidence::PowerReduction { exact, .. }, .. } => *exact,
            _ => false,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            OrderVerdict::Infinite { certificate, .. } => Some(certificate),
            _ => None,
        }
    }

    /// `finite(d)`, `infinite`, or `unknown`.
    pub fn summary(&self) -> String {
        match self {
            OrderVerdict::Finite { order, .. } => format!("finite({order})"),
            OrderVerdict::Infinite { .. } => "infinite".into(),
            OrderVerdict::Unknown { .. } => "unknown".into(),
        }
    }
}

struct Rung {
    name: String,
    quotient: FiniteRealization,
    kernel: OnceLock<Result<KernelAbelianization, CertificateError>>,
}

impl Rung {
    fn new(name: impl Into<String>, quotient: FiniteRealization) -> Self {
        Rung { name: name.into(), quotient, kernel: OnceLock::new() }
    }
}

/// Everything the oracle derives from a presentation alone.
pub struct GroupContext {
    presentation: Presentation,
    budget: OracleBudget,
    abelian: AbelianInvariants,
    enumeration: EnumerationOutcome,
    realization: Option<FiniteRealization>,
    rewriting: RewritingSystem,
    ladder: Vec<Rung>,
}

impl GroupContext {
    pub fn new(p: &Presentation, budget: OracleBudget) -> Self {
        let abelian = abelian_invariants(p);
        let (enumeration, realization) = if abelian.free_rank > 0 {
            (EnumerationOutcome::Skipped { free_rank: abelian.free_rank }, None)
        } else {
            let t = enumerate_cosets(p, &[], budget.max_cosets);
            match realize(p, &t) {
                Ok(r) => (EnumerationOutcome::Closed { order: r.order(), stats: t.stats() }, Some(r)),
                Err(_) => (EnumerationOutcome::Exhausted { max_cosets: budget.max_cosets, stats: t.stats() }, None),
            }
        };
        let rewriting = if realization.is_some() {
            rules_from_presentation(p)
        } else {
            knuth_bendix(&rules_from_presentation(p), budget.kb)
        };
        let mut ladder = vec![Rung::new("trivial", trivial_quotient(p))];
        if abelian.is_finite() {
            if let Some(q) = abelian_quotient(p, 0, budget.max_quotient_order) {
                let mut last = q.order();
                if last > 1 {
                    ladder.push(Rung::new("abelianization", q));
                }
                for class in 2..=budget.max_class {
                    match lower_central_quotient(p, class, budget.quotient_cosets) {
                        Some(q) if q.order() > last && q.order() <= budget.max_quotient_order => {
                            last = q.order();
                            ladder.push(Rung::new(format!("lower central quotient of class {class}"), q));
                        }
                        _ => break,
                    }
                }
            }
        } else if let Some(q) = abelian_quotient(p, 2, budget.max_quotient_order) {
            ladder.push(Rung::new("abelianization mod 2", q));
        }
        GroupContext { presentation: p.clone(), budget, abelian, enumeration, realization, rewriting, ladder }
    }

    /// Adds a finite quotient to the end of the certificate ladder. Returns
    /// false (and adds nothing) if it is not a quotient of the presentation.
    pub fn add_quotient(&mut self, name: impl Into<String>, q: FiniteRealization) -> bool {
        if !q.is_quotient_of(&self.presentation) {
            return false;
        }
        self.ladder.push(Rung::new(name, q));
        true
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn budget(&self) -> &OracleBudget {
        &self.budget
    }

    pub fn abelian_invariants(&self) -> &AbelianInvariants {
        &self.abelian
    }

    pub fn enumeration(&self) -> &EnumerationOutcome {
        &self.enumeration
    }

    /// The group itself, when coset enumeration closed.
    pub fn realization(&self) -> Option<&FiniteRealization> {
        self.realization.as_ref()
    }

    pub fn rewriting(&self) -> &RewritingSystem {
        &self.rewriting
    }

    pub fn kb_stats(&self) -> KbStats {
        self.rewriting.stats()
    }

    pub fn quotient_names(&self) -> Vec<&str> {
        self.ladder.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn element_order(&self, w: &Word, n_hint: u64) -> OrderVerdict {
        let mut attempts = Vec::new();

        match &self.realization {
            Some(r) => {
                return OrderVerdict::Finite {
                    order: element_order_finite(r, w),
                    evidence: FiniteEvidence::CosetEnumeration { group_order: r.order() },
                }
            }
            None => attempts.push(Attempt {
                strategy: "coset_enumeration".into(),
                outcome: match &self.enumeration {
                    EnumerationOutcome::Skipped { free_rank } => format!("skipped: abelianization has free rank {free_rank}"),
                    _ => format!("exhausted at {} cosets", self.budget.max_cosets),
                },
            }),
        }

        let n_max = self.budget.power_factor.saturating_mul(n_hint.max(1)).min(self.budget.max_powers);
        match finite_order_by_powers(&self.rewriting, w, n_max) {
            PowerOrder::Finite(d) => {
                let confluent = self.rewriting.is_confluent();
                let exact_in = if confluent {
                    None
                } else {
                    self.ladder
                        .iter()
                        .find(|r| element_order_finite(&r.quotient, w) == d)
                        .map(|r| r.name.clone())
                };
                return OrderVerdict::Finite {
                    order: d,
                    evidence: FiniteEvidence::PowerReduction {
                        power: d,
                        confluent,
                        rules: self.rewriting.rule_count(),
                        exact: confluent || exact_in.is_some(),
                        exact_in,
                    },
                };
            }
            PowerOrder::NotFound => attempts.push(Attempt {
                strategy: "power_reduction".into(),
                outcome: format!(
                    "no power up to {n_max} rewrites to 1 ({} rules, {:?})",
                    self.rewriting.rule_count(),
                    self.rewriting.stats().outcome
                ),
            }),
        }

        for rung in &self.ladder {
            let kernel = rung.kernel.get_or_init(|| KernelAbelianization::new(&self.presentation, &rung.quotient));
            let result = kernel.as_ref().map_err(Clone::clone).and_then(|k| k.certificate(w));
            match result {
                Ok(cert) => return OrderVerdict::Infinite { quotient: rung.name.clone(), certificate: Box::new(cert) },
                Err(e) => attempts.push(Attempt { strategy: format!("certificate[{}]", rung.name), outcome: e.to_string() }),
            }
        }
        OrderVerdict::Unknown { attempts }
    }
}

/// One-shot convenience: builds a context for `p` and asks about `w`.
pub fn element_order(p: &Presentation, w: &Word, n_hint: u64, budget: OracleBudget) -> OrderVerdict {
    GroupContext::new(p, budget).element_order(w, n_hint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;
    use crate::subgrp::verify_certificate;
    use crate::words::enumerate_reduced;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn pres(s: &str) -> Presentation {
        parse_presentation(s).unwrap()
    }

    fn small_budget() -> OracleBudget {
        OracleBudget { max_cosets: 20_000, ..OracleBudget::default() }
    }

    fn ctx(text: &str) -> GroupContext {
        GroupContext::new(&pres(text), small_budget())
    }

    const TRIANGLE: &str = "gens 2\nrel aaa\nrel bbb\nrel ababab\n";

    #[test]
    fn free_group_elements_are_infinite() {
        let c = GroupContext::new(&Presentation::free(2), small_budget());
        assert_eq!(c.enumeration(), &EnumerationOutcome::Skipped { free_rank: 2 });
        let v = c.element_order(&w("a"), 2);
        assert!(v.is_infinite());
        verify_certificate(v.certificate().unwrap()).unwrap();
    }

    #[test]
    fn z2_free_product_z() {
        let c = ctx("gens 2\nrel aa\n");
        let v = c.element_order(&w("a"), 2);
        assert_eq!(v.finite_order(), Some(2));
        assert!(v.is_exact());
        assert!(c.element_order(&w("b"), 2).is_infinite());
    }

    #[test]
    fn triangle_group_orders() {
        let c = ctx(TRIANGLE);
        assert!(matches!(c.enumeration(), EnumerationOutcome::Exhausted { .. }));
        let v = c.element_order(&w("ab"), 3);
        assert_eq!(v.finite_order(), Some(3));
        assert!(v.is_exact());
        let v = c.element_order(&w("aB"), 3);
        assert!(v.is_infinite(), "{v:?}");
        verify_certificate(v.certificate().unwrap()).unwrap();
    }

    #[test]
    fn closed_enumeration_gives_exact_orders() {
        let c = ctx("gens 2\nrel aa\nrel bb\nrel abab\n");
        let v = c.element_order(&w("ab"), 2);
        assert_eq!(v, OrderVerdict::Finite { order: 2, evidence: FiniteEvidence::CosetEnumeration { group_order: 4 } });
        assert_eq!(c.element_order(&w("aa"), 2).finite_order(), Some(1));
    }

    #[test]
    fn dinf_translation_is_infinite() {
        let c = ctx("gens 2\nrel aa\nrel bb\n");
        let v = c.element_order(&w("ab"), 2);
        assert!(v.is_infinite());
        assert_eq!(c.element_order(&w("aba"), 2).finite_order(), Some(2));
    }

    #[test]
    fn unknown_when_nothing_decides() {
        // Baumslag–Solitar-like relator: no strategy applies within tiny budgets
        let p = pres("gens 2\nrel abAbbaBB\nrel abbbbbbbAB\n");
        let budget = OracleBudget { max_cosets: 50, kb: KbBudget { max_rules: 20, max_len: 10, max_steps: 100 }, ..OracleBudget::default() };
        let c = GroupContext::new(&p, budget);
        let v = c.element_order(&w("b"), 2);
        if let OrderVerdict::Unknown { attempts } = &v {
            assert!(attempts.iter().any(|a| a.strategy.starts_with("certificate")));
        } else {
            // a decisive answer must at least be sound: b^6 = 1 here
            assert!(!v.is_infinite(), "{v:?}");
        }
    }

    #[test]
    fn extra_quotients_must_be_quotients() {
        let mut c = ctx(TRIANGLE);
        let c5 = FiniteRealization::from_regular_action(&pres("gens 2\nrel aaaaa\nrel b\n"), &[vec![1, 2, 3, 4, 0], vec![0, 1, 2, 3, 4]]).unwrap();
        assert!(!c.add_quotient("c5", c5));
        assert!(!c.quotient_names().contains(&"c5"));
        assert_eq!(c.quotient_names()[..2], ["trivial", "abelianization"]);
    }

    #[test]
    fn verdicts_serialize() {
        let c = ctx("gens 2\nrel aa\n");
        let json = serde_json::to_value(c.element_order(&w("a"), 2)).unwrap();
        assert_eq!(json["verdict"], "finite");
        assert_eq!(json["order"], 2);
        assert_eq!(json["evidence"]["strategy"], "power_reduction");
    }

    fn words(rank: usize, count: usize) -> Vec<Word> {
        enumerate_reduced(rank, None).skip(1).take(count).collect()
    }

    #[test]
    fn adding_relators_never_turns_finite_into_infinite() {
        let chain = ["gens 2\n", "gens 2\nrel aaa\n", "gens 2\nrel aaa\nrel bbb\n", TRIANGLE, "gens 2\nrel aaa\nrel bbb\nrel ababab\nrel aBaBaB\n"];
        let ctxs: Vec<GroupContext> = chain.iter().map(|t| ctx(t)).collect();
        for x in words(2, 60) {
            let verdicts: Vec<OrderVerdict> = ctxs.iter().map(|c| c.element_order(&x, 3)).collect();
            for pair in verdicts.windows(2) {
                if let (Some(d), Some(e)) = (pair[0].finite_order(), pair[1].finite_order()) {
                    assert_eq!(d % e, 0, "{x}: order {e} in the quotient does not divide {d}");
                }
                assert!(!(pair[0].is_finite() && pair[1].is_infinite()), "{x}");
            }
        }
    }

    #[test]
    fn closed_orders_agree_with_power_reduction() {
        // B(2,3): coset enumeration and a completed rewriting system must agree
        let text = "gens 2\nrel aaa\nrel bbb\nrel ababab\nrel aBaBaB\n";
        let c = ctx(text);
        let kb = knuth_bendix(&rules_from_presentation(&pres(text)), KbBudget::default());
        assert!(kb.is_confluent());
        for x in words(2, 200) {
            let d = c.element_order(&x, 3).finite_order().unwrap();
            assert_eq!(finite_order_by_powers(&kb, &x, 12), PowerOrder::Finite(d), "{x}");
        }
    }

    fn conjugation_case() -> impl Strategy<Value = (usize, Word, Word)> {
        let word = |max| prop::collection::vec(0usize..4, 1..max).prop_map(Word::from_codes);
        (0usize..4, word(5), word(4))
    }

    const CONFLUENT_OR_CLOSED: [&str; 4] = [
        "gens 2\nrel aa\nrel bb\n",
        "gens 2\nrel aaa\nrel bbb\n",
        "gens 2\nrel aa\nrel bb\nrel abab\n",
        "gens 2\nrel aaa\nrel bbb\nrel ababab\nrel aBaBaB\n",
    ];

    static CONJ_CTXS: std::sync::LazyLock<Vec<GroupContext>> =
        std::sync::LazyLock::new(|| CONFLUENT_OR_CLOSED.iter().map(|t| ctx(t)).collect());
    static TRIANGLE_CTX: std::sync::LazyLock<GroupContext> = std::sync::LazyLock::new(|| ctx(TRIANGLE));

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn conjugation_invariance((which, x, u) in conjugation_case()) {
            prop_assume!(!x.is_empty());
            let c = &CONJ_CTXS[which];
            let y = u.concat(&x).concat(&u.inverse());
            let (vx, vy) = (c.element_order(&x, 3), c.element_order(&y, 3));
            prop_assert_eq!(vx.summary(), vy.summary());
        }

        #[test]
        fn triangle_verdicts_never_conflict_under_conjugation((_w, x, u) in conjugation_case()) {
            prop_assume!(!x.is_empty());
            let c = &*TRIANGLE_CTX;
            let y = u.concat(&x).concat(&u.inverse());
            let (vx, vy) = (c.element_order(&x, 3), c.element_order(&y, 3));
            prop_assert!(!(vx.is_finite() && vy.is_infinite()) && !(vx.is_infinite() && vy.is_finite()));
        }
    }
}
