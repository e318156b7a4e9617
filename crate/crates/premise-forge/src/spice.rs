//! Tuple-set similarity between two premise sets, used for duplicate
//! filtering of generated questions.

use crate::premise::Premise;

/// Match counts between a generated and a reference premise set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleMatch {
    pub matched: usize,
    pub gen_total: usize,
    pub ref_total: usize,
}

/// Greedy exact-lemma matching after canonicalization; each reference tuple
/// is consumed at most once.
pub fn match_tuples(gen: &[Premise], reference: &[Premise]) -> TupleMatch {
    let mut remaining: Vec<&Premise> = reference.iter().collect();
    let mut matched = 0;
    for g in gen {
        if let Some(idx) = remaining.iter().position(|r| *r == g) {
            remaining.swap_remove(idx);
            matched += 1;
        }
    }
    TupleMatch {
        matched,
        gen_total: gen.len(),
        ref_total: reference.len(),
    }
}

/// F1 over matched tuples. Both sets empty scores 1.0 so a contentless
/// generated question counts as a duplicate; exactly one empty scores 0.0.
pub fn spice_f1(gen: &[Premise], reference: &[Premise]) -> f64 {
    let m = match_tuples(gen, reference);
    if m.gen_total == 0 && m.ref_total == 0 {
        return 1.0;
    }
    if m.gen_total == 0 || m.ref_total == 0 || m.matched == 0 {
        return 0.0;
    }
    let precision = m.matched as f64 / m.gen_total as f64;
    let recall = m.matched as f64 / m.ref_total as f64;
    2.0 * precision * recall / (precision + recall)
}
