//! PCA and Fisher LDA.
//!
//! Both models use the population (1/M) covariance convention and the
//! Jacobi eigensolver from [`crate::linalg`]. PCA switches to the Gram
//! trick when the dimensionality exceeds the observation count — the
//! M x M Gram matrix of centred observations shares its nonzero
//! eigenvalues with the covariance, and mapping its eigenvectors back
//! through the data matrix recovers the principal directions without
//! ever forming an N x N covariance (N = 409600 for the full-CWT
//! pipeline).
//!
//! LDA maximizes the Fisher quotient of between-class to within-class
//! scatter. The nonsymmetric `Sw^-1 Sb` eigenproblem is solved as a
//! symmetric generalized problem through the Cholesky factor of `Sw`,
//! which keeps the eigensolve orthogonal and flags singular scatter
//! cleanly.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, solve_lower, solve_lower_transpose, symmetric_eigen, Mat};

/// Relative tolerance separating "numerically zero" eigenvalues/pivots
/// from real ones.
const REL_EPS: f64 = 1e-12;

/// How many components PCA keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcaTarget {
    /// Smallest count whose cumulative eigenvalue fraction reaches the
    /// threshold (in (0, 1]).
    Energy(f64),
    /// Exact component count.
    Components(usize),
}

impl Default for PcaTarget {
    fn default() -> Self {
        PcaTarget::Energy(0.90)
    }
}

/// Fitted PCA basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Retained principal directions, unit norm, one per entry; the
    /// largest-magnitude coordinate of each is positive (first index on
    /// ties), fixing the sign that an eigensolve leaves free.
    pub components: Vec<Vec<f64>>,
    /// Full computed eigenvalue spectrum, descending, 1/M convention;
    /// tiny negatives from the eigensolve are clamped to zero.
    pub eigenvalues: Vec<f64>,
    /// Cumulative eigenvalue fraction captured by the retained set.
    pub energy_fraction: f64,
}

impl PcaModel {
    pub fn retained(&self) -> usize {
        self.components.len()
    }

    /// Sum of discarded eigenvalues = expected squared reconstruction
    /// error per observation under the 1/M convention.
    pub fn discarded_energy(&self) -> f64 {
        self.eigenvalues[self.retained()..].iter().sum()
    }
}

fn check_observations(data: &[Vec<f64>]) -> Result<usize> {
    if data.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 observations, got {}",
            data.len()
        )));
    }
    let d = data[0].len();
    if d == 0 {
        return Err(Error::Data("observations have zero dimension".into()));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Data(format!(
                "observation {i} has {} dimensions, expected {d}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("observation {i} has non-finite values")));
        }
    }
    Ok(d)
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Fits PCA on row observations.
///
/// Component retention by [`PcaTarget::Energy`] uses a `1e-12` relative
/// slack on the threshold comparison so spectra constructed to sit
/// exactly on a boundary select the intended count despite eigensolve
/// rounding.
pub fn pca_fit(data: &[Vec<f64>], target: PcaTarget) -> Result<PcaModel> {
    let d = check_observations(data)?;
    let m = data.len();
    if let PcaTarget::Energy(th) = target {
        if !(th > 0.0 && th <= 1.0) {
            return Err(Error::Config(format!(
                "energy threshold must be in (0, 1], got {th}"
            )));
        }
    }

    let mut mean = vec![0.0; d];
    for row in data {
        for (acc, &v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }
    // centred observations as columns of A (d x m)
    let centred: Vec<Vec<f64>> = data
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(v, mu)| v - mu).collect())
        .collect();

    let (mut eigenvalues, mut components): (Vec<f64>, Vec<Vec<f64>>) = if d > m {
        // Gram trick: G = A^T A / M (m x m) shares nonzero eigenvalues
        // with the covariance A A^T / M; directions are A v, normalized.
        let mut g = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let dot: f64 = centred[i]
                    .iter()
                    .zip(&centred[j])
                    .map(|(a, b)| a * b)
                    .sum();
                g[(i, j)] = dot / m as f64;
                g[(j, i)] = g[(i, j)];
            }
        }
        let (vals, vecs) = symmetric_eigen(&g)?;
        let dirs = (0..m)
            .map(|idx| {
                let v = vecs.col(idx);
                let mut u = vec![0.0; d];
                for (obs, &w) in centred.iter().zip(&v) {
                    for (acc, &x) in u.iter_mut().zip(obs) {
                        *acc += w * x;
                    }
                }
                u
            })
            .collect();
        (vals, dirs)
    } else {
        let mut c = Mat::zeros(d, d);
        for obs in &centred {
            for i in 0..d {
                for j in 0..=i {
                    c[(i, j)] += obs[i] * obs[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..=i {
                c[(i, j)] /= m as f64;
                c[(j, i)] = c[(i, j)];
            }
        }
        let (vals, vecs) = symmetric_eigen(&c)?;
        let dirs = (0..d).map(|idx| vecs.col(idx)).collect();
        (vals, dirs)
    };

    for v in &mut eigenvalues {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::Data(
            "zero variance: all observations are identical".into(),
        ));
    }
    let nonzero = eigenvalues
        .iter()
        .take_while(|&&v| v > REL_EPS * total)
        .count();

    let k = match target {
        PcaTarget::Components(k) => {
            if k == 0 || k > eigenvalues.len() {
                return Err(Error::Config(format!(
                    "component count {k} out of range 1..={}",
                    eigenvalues.len()
                )));
            }
            if k > nonzero {
                return Err(Error::Data(format!(
                    "requested {k} components but only {nonzero} have nonzero variance"
                )));
            }
            k
        }
        PcaTarget::Energy(th) => {
            let mut cum = 0.0;
            let mut k = nonzero;
            for (i, &v) in eigenvalues.iter().enumerate() {
                cum += v;
                if cum / total >= th - REL_EPS {
                    k = i + 1;
                    break;
                }
            }
            k.min(nonzero).max(1)
        }
    };

    components.truncate(k);
    for dir in &mut components {
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        // norm > 0 is guaranteed: k never exceeds the nonzero-eigenvalue count
        for v in dir.iter_mut() {
            *v /= norm;
        }
        fix_sign(dir);
    }
    let energy_fraction = eigenvalues[..k].iter().sum::<f64>() / total;
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        energy_fraction,
    })
}

/// Projects an observation: components^T (x - mean).
pub fn pca_project(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.mean.len() {
        return Err(Error::Data(format!(
            "observation has {} dimensions, model expects {}",
            x.len(),
            model.mean.len()
        )));
    }
    Ok(model
        .components
        .iter()
        .map(|c| {
            c.iter()
                .zip(x.iter().zip(&model.mean))
                .map(|(ci, (xi, mi))| ci * (xi - mi))
                .sum()
        })
        .collect())
}

/// Maps a projection back to the original space.
pub fn pca_reconstruct(model: &PcaModel, proj: &[f64]) -> Vec<f64> {
    let mut x = model.mean.clone();
    for (c, &p) in model.components.iter().zip(proj) {
        for (xi, &ci) in x.iter_mut().zip(c) {
            *xi += p * ci;
        }
    }
    x
}

// ---------------------------------------------------------------------------
// LDA
// ---------------------------------------------------------------------------

/// Fitted Fisher discriminant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// Discriminant directions (unit norm, PCA sign convention), at most
    /// C - 1 of them, ordered by decreasing Fisher eigenvalue.
    pub projection: Vec<Vec<f64>>,
    /// Fisher eigenvalues matching `projection`.
    pub eigenvalues: Vec<f64>,
    /// (label, class mean), ascending label.
    pub class_means: Vec<(u32, Vec<f64>)>,
    /// Unweighted mean of class means.
    pub mean_of_means: Vec<f64>,
}

/// Fits LDA on row observations with integer labels.
///
/// Scatter follows the unnormalized definitions: `Sw` sums squared
/// deviations from each class mean, `Sb` sums one outer product per
/// class of (class mean - mean of class means) — classes weigh equally
/// in `Sb` regardless of size. `k` (default C - 1) is clamped to C - 1.
pub fn lda_fit(data: &[Vec<f64>], labels: &[u32], k: Option<usize>) -> Result<LdaModel> {
    let d = check_observations(data)?;
    if labels.len() != data.len() {
        return Err(Error::Data(format!(
            "{} labels for {} observations",
            labels.len(),
            data.len()
        )));
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let c = classes.len();
    if c < 2 {
        return Err(Error::Data(
            "LDA needs at least two classes in the training data".into(),
        ));
    }

    let mut class_means: Vec<(u32, Vec<f64>)> = Vec::with_capacity(c);
    for &label in &classes {
        let mut mean = vec![0.0; d];
        let mut count = 0usize;
        for (row, &l) in data.iter().zip(labels) {
            if l == label {
                for (acc, &v) in mean.iter_mut().zip(row) {
                    *acc += v;
                }
                count += 1;
            }
        }
        for v in &mut mean {
            *v /= count as f64;
        }
        class_means.push((label, mean));
    }
    let mut mean_of_means = vec![0.0; d];
    for (_, mu) in &class_means {
        for (acc, &v) in mean_of_means.iter_mut().zip(mu) {
            *acc += v;
        }
    }
    for v in &mut mean_of_means {
        *v /= c as f64;
    }

    let mut sw = Mat::zeros(d, d);
    for (row, &l) in data.iter().zip(labels) {
        let mu = &class_means.iter().find(|(cl, _)| *cl == l).unwrap().1;
        let dev: Vec<f64> = row.iter().zip(mu.iter()).map(|(a, b)| a - b).collect();
        for i in 0..d {
            for j in 0..=i {
                sw[(i, j)] += dev[i] * dev[j];
            }
        }
    }
    let mut sb = Mat::zeros(d, d);
    for (_, mu) in &class_means {
        let dev: Vec<f64> = mu.iter().zip(&mean_of_means).map(|(a, b)| a - b).collect();
        for i in 0..d {
            for j in 0..=i {
                sb[(i, j)] += dev[i] * dev[j];
            }
        }
    }
    for m in [&mut sw, &mut sb] {
        for i in 0..d {
            for j in 0..i {
                m[(j, i)] = m[(i, j)];
            }
        }
    }

    let l = cholesky(&sw, REL_EPS).map_err(|_| {
        Error::Data(
            "within-class scatter is singular; reduce dimensionality first \
             (e.g. project onto principal components before LDA)"
                .into(),
        )
    })?;

    // B = L^-1 Sb L^-T, symmetric with the same spectrum as Sw^-1 Sb
    let mut z = Mat::zeros(d, d); // Z = L^-1 Sb
    for j in 0..d {
        let col = solve_lower(&l, &sb.col(j));
        for i in 0..d {
            z[(i, j)] = col[i];
        }
    }
    let mut b = Mat::zeros(d, d); // B = Z L^-T => B^T = L^-1 Z^T
    let zt = z.transpose();
    for j in 0..d {
        let col = solve_lower(&l, &zt.col(j));
        for i in 0..d {
            b[(j, i)] = col[i];
        }
    }
    let (vals, vecs) = symmetric_eigen(&b)?;

    let scale = vals.first().copied().unwrap_or(0.0).abs().max(1.0);
    if vals.first().copied().unwrap_or(0.0) <= REL_EPS * scale {
        return Err(Error::Data(
            "class means coincide: no discriminative directions".into(),
        ));
    }

    let k = k.unwrap_or(c - 1).min(c - 1).max(1);
    let mut projection = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for idx in 0..k.min(d) {
        let y = vecs.col(idx);
        let mut w = solve_lower_transpose(&l, &y);
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut w {
            *v /= norm;
        }
        fix_sign(&mut w);
        projection.push(w);
        eigenvalues.push(vals[idx].max(0.0));
    }
    Ok(LdaModel {
        projection,
        eigenvalues,
        class_means,
        mean_of_means,
    })
}

/// Projects an observation onto the discriminant directions (no
/// centring; Fisher directions are translation-covariant anyway).
pub fn lda_project(model: &LdaModel, x: &[f64]) -> Result<Vec<f64>> {
    let d = model.mean_of_means.len();
    if x.len() != d {
        return Err(Error::Data(format!(
            "observation has {} dimensions, model expects {d}",
            x.len()
        )));
    }
    Ok(model
        .projection
        .iter()
        .map(|w| w.iter().zip(x).map(|(wi, xi)| wi * xi).sum())
        .collect())
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    // -- PCA ------------------------------------------------------------------

    #[test]
    fn two_point_worked_example() {
        let data = vec![vec![2.0, 0.0], vec![0.0, 0.0]];
        let model = pca_fit(&data, PcaTarget::Components(1)).unwrap();
        assert_eq!(model.mean, vec![1.0, 0.0]);
        assert!((model.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((model.components[0][0] - 1.0).abs() < 1e-12);
        assert!(model.components[0][1].abs() < 1e-12);
    }

    /// Observations +-c_i e_i give an exactly diagonal covariance with
    /// eigenvalue c_i^2 / 8 at dimension i (16 observations).
    fn spectrum_data(lambdas: &[f64]) -> Vec<Vec<f64>> {
        let d = lambdas.len();
        let m = 2 * d;
        let mut data = Vec::with_capacity(m);
        for (i, &lam) in lambdas.iter().enumerate() {
            let c = (lam * m as f64 / 2.0).sqrt();
            for sign in [1.0, -1.0] {
                let mut row = vec![0.0; d];
                row[i] = sign * c;
                data.push(row);
            }
        }
        data
    }

    #[test]
    fn energy_threshold_selects_boundary_count() {
        // top 4 of {30,30,15,15,4,3,2,1} hold exactly 90% of 100
        let data = spectrum_data(&[30.0, 30.0, 15.0, 15.0, 4.0, 3.0, 2.0, 1.0]);
        let model = pca_fit(&data, PcaTarget::Energy(0.90)).unwrap();
        assert_eq!(model.retained(), 4);
        // one component fewer is below the threshold
        let top3: f64 = model.eigenvalues[..3].iter().sum();
        let total: f64 = model.eigenvalues.iter().sum();
        assert!(top3 / total < 0.90);
    }

    #[test]
    fn explicit_component_count() {
        let data = spectrum_data(&[4.0, 3.0, 2.0, 1.0]);
        let model = pca_fit(&data, PcaTarget::Components(2)).unwrap();
        assert_eq!(model.retained(), 2);
        assert!((model.energy_fraction - 0.7).abs() < 1e-9);
    }

    #[test]
    fn identical_data_is_zero_variance_error() {
        let data = vec![vec![1.0, 2.0]; 5];
        let err = pca_fit(&data, PcaTarget::Components(1)).unwrap_err();
        assert!(err.to_string().contains("zero variance"), "{err}");
    }

    #[test]
    fn projection_centres_and_rotates() {
        let data = vec![vec![2.0, 0.0], vec![0.0, 0.0]];
        let model = pca_fit(&data, PcaTarget::Components(1)).unwrap();
        assert!((pca_project(&model, &[2.0, 0.0]).unwrap()[0] - 1.0).abs() < 1e-12);
        assert!((pca_project(&model, &[0.0, 0.0]).unwrap()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_path_agrees_with_direct_covariance_eigensolve() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..20 {
            // 5 observations x 8 dims forces the Gram path (d > m)
            let data: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..8).map(|_| rng.uniform(-3.0, 3.0)).collect())
                .collect();
            let model = pca_fit(&data, PcaTarget::Components(3)).unwrap();

            // direct covariance eigensolve as the oracle
            let m = data.len();
            let d = data[0].len();
            let mut mean = vec![0.0; d];
            for row in &data {
                for (a, &v) in mean.iter_mut().zip(row) {
                    *a += v;
                }
            }
            for v in &mut mean {
                *v /= m as f64;
            }
            let mut c = Mat::zeros(d, d);
            for row in &data {
                let dev: Vec<f64> = row.iter().zip(&mean).map(|(a, b)| a - b).collect();
                for i in 0..d {
                    for j in 0..d {
                        c[(i, j)] += dev[i] * dev[j] / m as f64;
                    }
                }
            }
            let (vals, vecs) = symmetric_eigen(&c).unwrap();
            for idx in 0..3 {
                assert!((model.eigenvalues[idx] - vals[idx]).abs() < 1e-8);
                let dir = vecs.col(idx);
                let dot: f64 = dir.iter().zip(&model.components[idx]).map(|(a, b)| a * b).sum();
                assert!((dot.abs() - 1.0).abs() < 1e-8, "component {idx}: |dot| = {}", dot.abs());
            }
        }
    }

    #[test]
    fn reconstruction_error_equals_discarded_energy() {
        let mut rng = SplitMix64::new(123);
        let data: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..6).map(|_| rng.normal()).collect())
            .collect();
        let model = pca_fit(&data, PcaTarget::Components(3)).unwrap();
        let mse: f64 = data
            .iter()
            .map(|x| {
                let proj = pca_project(&model, x).unwrap();
                let rec = pca_reconstruct(&model, &proj);
                x.iter().zip(&rec).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .sum::<f64>()
            / data.len() as f64;
        assert!(
            (mse - model.discarded_energy()).abs() < 1e-9,
            "mse {mse} vs discarded {}",
            model.discarded_energy()
        );
    }

    // -- LDA --------------------------------------------------------------------

    fn worked_example() -> (Vec<Vec<f64>>, Vec<u32>) {
        (
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![4.0, 0.0],
                vec![5.0, 0.0],
                vec![4.0, 1.0],
            ],
            vec![0, 0, 0, 1, 1, 1],
        )
    }

    #[test]
    fn lda_worked_example_direction() {
        let (data, labels) = worked_example();
        let model = lda_fit(&data, &labels, None).unwrap();
        assert_eq!(model.projection.len(), 1);
        // leading direction parallel to (2, 1)/sqrt(5)
        let w = &model.projection[0];
        let expect = [2.0 / 5.0f64.sqrt(), 1.0 / 5.0f64.sqrt()];
        let dot = w[0] * expect[0] + w[1] * expect[1];
        assert!((dot.abs() - 1.0).abs() < 1e-10, "direction {w:?}");
    }

    #[test]
    fn lda_two_class_matches_closed_form() {
        // w parallel to Sw^-1 (m1 - m2) for any 2-class problem
        let mut rng = SplitMix64::new(31);
        for _ in 0..20 {
            let d = 3;
            let mut data = Vec::new();
            let mut labels = Vec::new();
            let shift: Vec<f64> = (0..d).map(|_| rng.uniform(-2.0, 2.0)).collect();
            for i in 0..24 {
                let class = (i % 2) as u32;
                let row: Vec<f64> = (0..d)
                    .map(|j| rng.normal() + if class == 1 { shift[j] } else { 0.0 })
                    .collect();
                data.push(row);
                labels.push(class);
            }
            let model = lda_fit(&data, &labels, None).unwrap();

            // oracle: solve Sw x = (m0 - m1) by Gaussian elimination
            let m0 = &model.class_means[0].1;
            let m1 = &model.class_means[1].1;
            let mut sw = Mat::zeros(d, d);
            for (row, &l) in data.iter().zip(&labels) {
                let mu = if l == 0 { m0 } else { m1 };
                let dev: Vec<f64> = row.iter().zip(mu).map(|(a, b)| a - b).collect();
                for i in 0..d {
                    for j in 0..d {
                        sw[(i, j)] += dev[i] * dev[j];
                    }
                }
            }
            let rhs: Vec<f64> = m0.iter().zip(m1).map(|(a, b)| a - b).collect();
            let chol = cholesky(&sw, 1e-12).unwrap();
            let x = solve_lower_transpose(&chol, &solve_lower(&chol, &rhs));
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = x
                .iter()
                .zip(&model.projection[0])
                .map(|(a, b)| a / norm * b)
                .sum();
            let angle = dot.abs().min(1.0).acos();
            assert!(angle < 1e-6, "angle {angle}");
        }
    }

    #[test]
    fn lda_singular_scatter_suggests_pca() {
        // within-class variance only along dimension 0 -> Sw singular
        let data = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![5.0, 1.0],
            vec![6.0, 1.0],
        ];
        let labels = vec![0, 0, 1, 1];
        let err = lda_fit(&data, &labels, None).unwrap_err();
        assert!(err.to_string().contains("principal components"), "{err}");
    }

    #[test]
    fn lda_identical_means_is_an_error() {
        let data = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let labels = vec![0, 0, 1, 1];
        let err = lda_fit(&data, &labels, None).unwrap_err();
        assert!(err.to_string().contains("coincide"), "{err}");
    }

    #[test]
    fn lda_k_clamps_to_classes_minus_one() {
        let (data, labels) = worked_example();
        let model = lda_fit(&data, &labels, Some(5)).unwrap();
        assert_eq!(model.projection.len(), 1);
    }

    #[test]
    fn lda_projection_separates_worked_example() {
        let (data, labels) = worked_example();
        let model = lda_fit(&data, &labels, None).unwrap();
        let a: Vec<f64> = data[..3]
            .iter()
            .map(|x| lda_project(&model, x).unwrap()[0])
            .collect();
        let b: Vec<f64> = data[3..]
            .iter()
            .map(|x| lda_project(&model, x).unwrap()[0])
            .collect();
        let max_a = a.iter().cloned().fold(f64::MIN, f64::max);
        let min_b = b.iter().cloned().fold(f64::MAX, f64::min);
        // classes fall on disjoint intervals of the 1-D projection
        assert!(max_a < min_b || b.iter().cloned().fold(f64::MIN, f64::max) < a.iter().cloned().fold(f64::MAX, f64::min));
    }
}
