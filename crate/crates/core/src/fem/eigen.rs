use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NodalMeasure, SparseSym, Support};
use crate::spectra::{SpectralResult, SpectrumKind};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Relative residual `|Kx - λBx| / (|Kx| + |λ||Bx|)` required of each pair.
    pub tol: f64,
    pub max_iter: usize,
    /// Guard vectors carried beyond the requested count.
    pub guard: usize,
    /// Shift as a fraction of `trace(K) / mass(B)`.
    pub shift: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1000, guard: 10, shift: 1e-8, seed: 0x5eed }
    }
}

/// Lowest `count` nonzero eigenpairs of `K u = λ B u` for diagonal `B`.
pub fn generalized_eigs(k: &SparseSym, b: &NodalMeasure, count: usize) -> Result<SpectralResult> {
    generalized_eigs_with(k, b, count, &EigenOptions::default())
}

/// Shift-invert block subspace iteration with Rayleigh-Ritz in the
/// `B`-inner product. Constants span the kernel of `K`; they are projected
/// out every step and reported as the leading zero eigenvalue.
pub fn generalized_eigs_with(k: &SparseSym, b: &NodalMeasure, count: usize, opts: &EigenOptions) -> Result<SpectralResult> {
    let n = k.dim();
    if b.len() != n {
        return Err(Error::Usage(format!("measure has {} weights for a {n}x{n} matrix", b.len())));
    }
    let w = &b.weights;
    let mass = b.mass();
    if !(mass > 0.0) || w.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Degenerate(format!("measure must be nonnegative with positive mass, got {mass}")));
    }
    let rank = w.iter().filter(|&&x| x > 0.0).count();
    if count + 1 > rank {
        return Err(Error::Capacity(format!(
            "requested {count} nonzero eigenvalues but the pencil has only {} finite ones",
            rank.saturating_sub(1)
        )));
    }
    let p = (count + opts.guard).min(rank - 1).max(count);
    let trace: f64 = k.diagonal().iter().sum();
    let eps = opts.shift * trace / mass;
    let shifted = k.add_diagonal(&w.iter().map(|x| eps * x).collect::<Vec<_>>());
    let factor = shifted.factor()?;

    let bdot = |x: &[f64], y: &[f64]| -> f64 { (0..n).map(|i| w[i] * x[i] * y[i]).sum() };
    let deflate = |x: &mut Vec<f64>| {
        let c = (0..n).map(|i| w[i] * x[i]).sum::<f64>() / mass;
        x.iter_mut().for_each(|v| *v -= c);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };

    let mut x: Vec<Vec<f64>> = (0..p).map(|_| random(&mut rng)).collect();
    let mut theta = vec![0.0; p];
    let mut residuals = vec![f64::INFINITY; count];
    for iter in 1..=opts.max_iter {
        let rhs: Vec<Vec<f64>> = x.iter().map(|v| (0..n).map(|i| w[i] * v[i]).collect()).collect();
        let mut y = factor.solve_many(&rhs);
        // B-orthonormalize with two passes of modified Gram-Schmidt.
        let mut j = 0;
        while j < y.len() {
            deflate(&mut y[j]);
            let before = bdot(&y[j], &y[j]).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let c = bdot(&y[i], &y[j]);
                    let (head, tail) = y.split_at_mut(j);
                    tail[0].iter_mut().zip(&head[i]).for_each(|(a, b)| *a -= c * b);
                }
            }
            let nrm = bdot(&y[j], &y[j]).sqrt();
            if !(nrm > 1e-10 * before) || nrm == 0.0 {
                // Lost to cancellation: restart this column from noise.
                let fresh = random(&mut rng);
                let bf: Vec<f64> = (0..n).map(|i| w[i] * fresh[i]).collect();
                y[j] = factor.solve(&bf);
                continue;
            }
            y[j].iter_mut().for_each(|v| *v /= nrm);
            j += 1;
        }
        // Rayleigh-Ritz on span(y).
        let ky: Vec<Vec<f64>> = y.iter().map(|v| k.matvec(v)).collect();
        let kp = Mat::<f64>::from_fn(p, p, |a, c| {
            let s: f64 = (0..n).map(|i| y[a][i] * ky[c][i]).sum();
            let t: f64 = (0..n).map(|i| y[c][i] * ky[a][i]).sum();
            0.5 * (s + t)
        });
        let eig = kp.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numeric {
            message: format!("small eigenproblem failed: {e:?}"),
            residual: f64::NAN,
        })?;
        let (s, u) = (eig.S(), eig.U());
        for a in 0..p {
            theta[a] = s[a];
        }
        let combine = |src: &[Vec<f64>], a: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for c in 0..p {
                let coef = u[(c, a)];
                out.iter_mut().zip(&src[c]).for_each(|(o, v)| *o += coef * v);
            }
            out
        };
        x = (0..p).map(|a| combine(&y, a)).collect();
        let kx: Vec<Vec<f64>> = (0..count).map(|a| combine(&ky, a)).collect();
        for a in 0..count {
            let (mut r2, mut k2, mut b2) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let bx = w[i] * x[a][i];
                let r = kx[a][i] - theta[a] * bx;
                r2 += r * r;
                k2 += kx[a][i] * kx[a][i];
                b2 += bx * bx;
            }
            residuals[a] = r2.sqrt() / (k2.sqrt() + theta[a].abs() * b2.sqrt()).max(f64::MIN_POSITIVE);
        }
        if residuals.iter().all(|&r| r <= opts.tol) {
            return Ok(assemble_result(b, mass, &theta[..count], &x[..count], &residuals, iter));
        }
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    Err(Error::Numeric { message: format!("eigensolver did not converge in {} iterations", opts.max_iter), residual: worst })
}

fn assemble_result(
    b: &NodalMeasure,
    mass: f64,
    theta: &[f64],
    x: &[Vec<f64>],
    residuals: &[f64],
    iterations: usize,
) -> SpectralResult {
    let n = b.len();
    let mut eigenvalues = vec![0.0];
    eigenvalues.extend_from_slice(theta);
    let mut eigenvectors = vec![vec![1.0 / mass.sqrt(); n]];
    for v in x {
        // Fix the sign so results are reproducible: largest entry positive.
        let big = v.iter().cloned().fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
        let s = if big < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.push(v.iter().map(|e| s * e).collect());
    }
    let mut res = vec![0.0];
    res.extend_from_slice(residuals);
    let kind = match b.support {
        Support::Area => SpectrumKind::Laplace,
        Support::Boundary => SpectrumKind::Steklov,
    };
    SpectralResult::new(kind, eigenvalues, eigenvectors, mass, res, iterations)
}
