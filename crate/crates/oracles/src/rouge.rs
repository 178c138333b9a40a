//! Rouge by naive counting and subsequence enumeration.

/// Lowercased alphanumeric runs.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

fn prf(hits: usize, ref_total: usize, cand_total: usize) -> Prf {
    let recall = if ref_total == 0 { 0.0 } else { hits as f64 / ref_total as f64 };
    let precision = if cand_total == 0 { 0.0 } else { hits as f64 / cand_total as f64 };
    let f1 = if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf { recall, precision, f1 }
}

fn ngrams(t: &[String], n: usize) -> Vec<Vec<String>> {
    if t.len() < n {
        return Vec::new();
    }
    (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
}

/// Clipped n-gram overlap: each candidate n-gram is matched at most as
/// often as it occurs in the reference.
pub fn rouge_n(reference: &str, candidate: &str, n: usize) -> Prf {
    let r = ngrams(&tokens(reference), n);
    let c = ngrams(&tokens(candidate), n);
    let mut pool = r.clone();
    let mut hits = 0;
    for g in &c {
        if let Some(pos) = pool.iter().position(|x| x == g) {
            pool.remove(pos);
            hits += 1;
        }
    }
    prf(hits, r.len(), c.len())
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// Longest common subsequence length by trying every subsequence of the
/// shorter sequence.
pub fn lcs_brute(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 20, "brute-force LCS is exponential");
    let mut best = 0;
    for mask in 0u32..(1u32 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let pick: Vec<&String> = (0..short.len()).filter(|i| mask >> i & 1 == 1).map(|i| &short[i]).collect();
        if is_subsequence(&pick, long) {
            best = size;
        }
    }
    best
}

pub fn rouge_l(reference: &str, candidate: &str) -> Prf {
    let r = tokens(reference);
    let c = tokens(candidate);
    prf(lcs_brute(&r, &c), r.len(), c.len())
}

fn lcs_rec(a: &[String], b: &[String], i: usize, j: usize) -> usize {
    if i == 0 || j == 0 {
        0
    } else if a[i - 1] == b[j - 1] {
        lcs_rec(a, b, i - 1, j - 1) + 1
    } else {
        lcs_rec(a, b, i - 1, j).max(lcs_rec(a, b, i, j - 1))
    }
}

/// Reference positions of one LCS. At a mismatch, drop the candidate token
/// when that keeps a strictly longer LCS, else drop the reference token.
fn lcs_positions(r: &[String], c: &[String]) -> Vec<usize> {
    let (mut i, mut j) = (r.len(), c.len());
    let mut out = Vec::new();
    while i > 0 && j > 0 {
        if r[i - 1] == c[j - 1] {
            out.push(i - 1);
            i -= 1;
            j -= 1;
        } else if lcs_rec(r, c, i, j - 1) > lcs_rec(r, c, i - 1, j) {
            j -= 1;
        } else {
            i -= 1;
        }
    }
    out
}

fn count(tokens: &[String], t: &str) -> usize {
    tokens.iter().filter(|x| *x == t).count()
}

/// Summary-level LCS over newline-separated sentences: per reference
/// sentence, the union of LCS hits against every candidate sentence, with
/// each token credited at most as often as it occurs in either text.
pub fn rouge_lsum(reference: &str, candidate: &str) -> Prf {
    let rs: Vec<Vec<String>> = reference.split('\n').map(tokens).filter(|t| !t.is_empty()).collect();
    let cs: Vec<Vec<String>> = candidate.split('\n').map(tokens).filter(|t| !t.is_empty()).collect();
    let all_r: Vec<String> = rs.concat();
    let all_c: Vec<String> = cs.concat();
    let mut budget_r: Vec<(String, usize)> = Vec::new();
    let mut budget_c: Vec<(String, usize)> = Vec::new();
    let mut hits = 0;
    for r in &rs {
        let mut union: Vec<usize> = Vec::new();
        for c in &cs {
            for p in lcs_positions(r, c) {
                if !union.contains(&p) {
                    union.push(p);
                }
            }
        }
        union.sort_unstable();
        for p in union {
            let t = &r[p];
            let used_r = budget_r.iter().find(|(x, _)| x == t).map_or(0, |(_, n)| *n);
            let used_c = budget_c.iter().find(|(x, _)| x == t).map_or(0, |(_, n)| *n);
            if used_r < count(&all_r, t) && used_c < count(&all_c, t) {
                hits += 1;
                for budget in [&mut budget_r, &mut budget_c] {
                    match budget.iter_mut().find(|(x, _)| x == t) {
                        Some((_, n)) => *n += 1,
                        None => budget.push((t.clone(), 1)),
                    }
                }
            }
        }
    }
    prf(hits, all_r.len(), all_c.len())
}
