use super::{KdTree, Vec3};
use crate::error::{Error, Result};

/// Symmetric sum of squared nearest-neighbour distances between two sets.
pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let tree_a = KdTree::new(a);
    let tree_b = KdTree::new(b);
    let forward: f64 = a.iter().map(|p| tree_b.nearest(p).unwrap().1).sum();
    let backward: f64 = b.iter().map(|p| tree_a.nearest(p).unwrap().1).sum();
    Ok(forward + backward)
}

/// Quadratic double loop; the reference the tree-backed version is checked against.
pub fn chamfer_brute_force(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let one_way = |from: &[Vec3], to: &[Vec3]| -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p - q).norm_squared())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    };
    Ok(one_way(a, b) + one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_sets_are_zero() {
        let a = vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0)];
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_counts_both_directions() {
        let d = chamfer(&[Vec3::zeros()], &[Vec3::new(0.0, 0.0, 2.0)]).unwrap();
        assert_eq!(d, 8.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(chamfer(&[], &[Vec3::zeros()]), Err(Error::EmptySet)));
        assert!(matches!(chamfer(&[Vec3::zeros()], &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut gen = |n: usize| -> Vec<Vec3> {
            (0..n)
                .map(|_| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(1.0..3.0)))
                .collect()
        };
        let a = gen(500);
        let b = gen(500);
        let fast = chamfer(&a, &b).unwrap();
        let slow = chamfer_brute_force(&a, &b).unwrap();
        assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
    }

    fn point() -> impl Strategy<Value = Vec3> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(a in prop::collection::vec(point(), 1..40), b in prop::collection::vec(point(), 1..40)) {
            let ab = chamfer(&a, &b).unwrap();
            let ba = chamfer(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
            prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        }
    }
}
