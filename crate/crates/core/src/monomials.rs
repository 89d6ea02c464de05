//! Monomial bases in graded lexicographic order.
//!
//! In two dimensions the order is `1, x, y, x², xy, y², x³, …`.

/// Exponent tuples of all monomials of total degree `<= degree` in `dim`
/// variables.
pub fn exponents(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(count(dim, degree));
    for d in 0..=degree {
        let mut current = vec![0; dim];
        push_exact(dim, d, 0, &mut current, &mut out);
    }
    out
}

/// Number of monomials of total degree `<= degree` in `dim` variables,
/// `C(degree + dim, dim)`.
pub fn count(dim: usize, degree: u32) -> usize {
    let mut c: usize = 1;
    for i in 1..=dim {
        c = c * (degree as usize + i) / i;
    }
    c
}

/// Largest total degree whose basis has at most `n` members in `dim`
/// variables, or `None` when `n == 0`.
pub fn max_degree_for(dim: usize, n: usize) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut d = 0;
    while count(dim, d + 1) <= n {
        d += 1;
    }
    Some(d)
}

fn push_exact(dim: usize, remaining: u32, slot: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slot + 1 == dim {
        current[slot] = remaining;
        out.push(current.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        current[slot] = e;
        push_exact(dim, remaining - e, slot + 1, current, out);
    }
}

#[inline]
pub fn eval(exps: &[u32], x: &[f64]) -> f64 {
    exps.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product()
}

/// Values of every basis monomial at `x`.
pub fn eval_all(basis: &[Vec<u32>], x: &[f64]) -> Vec<f64> {
    basis.iter().map(|e| eval(e, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_2d() {
        let e = exponents(2, 2);
        assert_eq!(e, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn counts() {
        for dim in 1..=3 {
            for d in 0..8 {
                assert_eq!(exponents(dim, d).len(), count(dim, d));
            }
        }
        assert_eq!(count(2, 13), 105);
        assert_eq!(count(2, 14), 120);
        assert_eq!(max_degree_for(2, 121), Some(14));
        assert_eq!(max_degree_for(2, 441), Some(28));
        assert_eq!(max_degree_for(1, 3), Some(2));
        assert_eq!(max_degree_for(2, 0), None);
    }

    #[test]
    fn evaluation() {
        assert_eq!(eval(&[2, 1], &[3.0, -2.0]), -18.0);
        assert_eq!(eval(&[0, 0], &[3.0, -2.0]), 1.0);
    }
}
