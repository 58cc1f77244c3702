//! Small permutation helpers shared by the enumeration code.

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        if !next_permutation(&mut current) {
            return out;
        }
    }
}

/// Advances to the next lexicographic permutation; false once the last one is reached.
pub fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

pub fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

pub fn is_permutation(xs: &[usize]) -> bool {
    let mut seen = vec![false; xs.len()];
    xs.iter().all(|&x| x < xs.len() && !std::mem::replace(&mut seen[x], true))
}

/// Lehmer rank of a permutation, in `0..n!`.
pub fn rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut r = 0;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count();
        r = r * (n - i) + smaller;
    }
    r
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Writes `perm` as a product of adjacent transpositions `s_j = (j j+1)`.
///
/// Returns `[j1, j2, ...]` with `perm = s_jm ∘ ... ∘ s_j1`, so a left action
/// applies `s_j1` first.
pub fn adjacent_word(perm: &[usize]) -> Vec<usize> {
    let mut w = perm.to_vec();
    let mut word = Vec::new();
    let n = w.len();
    for end in (1..n).rev() {
        for j in 0..end {
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                word.push(j);
            }
        }
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts_and_ranks() {
        let perms = permutations(4);
        assert_eq!(perms.len(), 24);
        for (k, p) in perms.iter().enumerate() {
            assert_eq!(rank(p), k);
        }
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn adjacent_words_compose_back() {
        for p in permutations(4) {
            let mut acc: Vec<usize> = (0..4).collect();
            for &j in &adjacent_word(&p) {
                // acc := s_j ∘ acc
                acc = acc
                    .iter()
                    .map(|&x| if x == j { j + 1 } else if x == j + 1 { j } else { x })
                    .collect();
            }
            assert_eq!(acc, p);
        }
    }
}
