use rand::seq::SliceRandom;
use rand::Rng;

/// `n` points in `[0, 1)^dim` such that, along every coordinate, each of the
/// `n` equal-width strata holds exactly one point.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        strata.shuffle(rng);
        for (point, &k) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            point[j] = ((k as f64 + u) / n as f64).min(1.0);
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stratum(v: f64, n: usize) -> usize {
        ((v * n as f64).floor() as usize).min(n - 1)
    }

    #[test]
    fn one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, dim) in [(4, 1), (7, 3), (20, 5)] {
            let pts = latin_hypercube(n, dim, &mut rng);
            assert_eq!(pts.len(), n);
            for j in 0..dim {
                let mut seen = vec![false; n];
                for p in &pts {
                    assert!((0.0..=1.0).contains(&p[j]));
                    let s = stratum(p[j], n);
                    assert!(!seen[s], "stratum {s} hit twice");
                    seen[s] = true;
                }
            }
        }
    }

    #[test]
    fn single_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = latin_hypercube(1, 3, &mut rng);
        assert_eq!(pts.len(), 1);
        assert!(pts[0].iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = latin_hypercube(10, 4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = latin_hypercube(10, 4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
