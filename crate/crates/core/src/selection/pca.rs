use alloc::vec;
use alloc::vec::Vec;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(values, vectors)` sorted by descending eigenvalue; `vectors[j]`
/// is the unit eigenvector for `values[j]`.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = c * x - s * y;
                    a[q][k] = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| v.iter().map(|row| row[i]).collect()).collect();
    (values, vectors)
}

/// Top principal axes of mean-centred rows. Uses the covariance matrix when
/// the dimension is small and the Gram matrix otherwise.
pub(crate) fn principal_axes(centered: &[Vec<f64>], count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = centered.len();
    let d = centered[0].len();
    let denom = (n.max(2) - 1) as f64;
    let (values, axes): (Vec<f64>, Vec<Vec<f64>>) = if d <= n {
        let mut cov = vec![vec![0.0; d]; d];
        for row in centered {
            for i in 0..d {
                for j in i..d {
                    cov[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                cov[i][j] /= denom;
                cov[j][i] = cov[i][j];
            }
        }
        symmetric_eigen(&cov)
    } else {
        let gram: Vec<Vec<f64>> = centered
            .iter()
            .map(|a| centered.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / denom).collect())
            .collect();
        let (values, us) = symmetric_eigen(&gram);
        let axes = us
            .iter()
            .map(|u| {
                let mut axis = vec![0.0; d];
                for (row, &w) in centered.iter().zip(u) {
                    for (a, x) in axis.iter_mut().zip(row) {
                        *a += w * x;
                    }
                }
                let norm = libm::sqrt(axis.iter().map(|x| x * x).sum::<f64>());
                if norm > 0.0 {
                    axis.iter_mut().for_each(|x| *x /= norm);
                }
                axis
            })
            .collect();
        (values, axes)
    };
    let mut values: Vec<f64> = values.into_iter().take(count).map(|v| v.max(0.0)).collect();
    let mut axes: Vec<Vec<f64>> = axes.into_iter().take(count).collect();
    for axis in axes.iter_mut() {
        let lead = axis
            .iter()
            .enumerate()
            .fold(0usize, |best, (i, x)| if x.abs() > axis[best].abs() { i } else { best });
        if axis[lead] < 0.0 {
            axis.iter_mut().for_each(|x| *x = -*x);
        }
    }
    while values.len() < count {
        values.push(0.0);
        axes.push(vec![0.0; d]);
    }
    (values, axes)
}
