//! Dense helpers over row-major `Vec<Vec<f64>>` matrices.

pub type Matrix = Vec<Vec<f64>>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A x`
pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

/// `y^T A`, returned as a column-indexed vector.
pub fn vec_mat(y: &[f64], a: &[Vec<f64>], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (yi, row) in y.iter().zip(a) {
        for (o, aij) in out.iter_mut().zip(row) {
            *o += yi * aij;
        }
    }
    out
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Column count of a matrix whose rows all share one length; `None` when ragged.
pub fn column_count(a: &[Vec<f64>]) -> Option<usize> {
    let cols = a.first().map_or(0, Vec::len);
    a.iter().all(|r| r.len() == cols).then_some(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(mat_vec(&a, &[1.0, -1.0]), vec![-1.0, -1.0]);
        assert_eq!(vec_mat(&[1.0, -1.0], &a, 2), vec![-2.0, -2.0]);
        assert_eq!(norm_inf(&[-3.0, 2.0]), 3.0);
        assert_eq!(column_count(&[vec![1.0], vec![1.0, 2.0]]), None);
    }
}
