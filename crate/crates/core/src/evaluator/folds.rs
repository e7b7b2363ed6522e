use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Assigns every trial a fold in `0..n_folds`, stratified by class.
///
/// Classes are visited in ascending id order; each class's members are
/// shuffled with the seeded generator and dealt round-robin, starting where the
/// previous class stopped so overall fold sizes stay within one of each other.
pub fn stratified_folds(labels: &[u32], n_folds: usize, seed: u64) -> Result<Vec<usize>> {
    if n_folds < 2 {
        return Err(Error::InvalidConfig(format!("{n_folds} folds (need at least 2)")));
    }
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((&class, members)) = by_class.iter().find(|(_, m)| m.len() < n_folds) {
        return Err(Error::ClassTooSmall {
            class,
            count: members.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next;
            next = (next + 1) % n_folds;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_folds_two_classes() {
        let labels = [1, 1, 1, 1, 2, 2, 2, 2];
        let f = stratified_folds(&labels, 2, 0).unwrap();
        for fold in 0..2 {
            for class in [1, 2] {
                let n = labels
                    .iter()
                    .zip(&f)
                    .filter(|(&l, &g)| l == class && g == fold)
                    .count();
                assert_eq!(n, 2);
            }
        }
    }

    #[test]
    fn class_too_small() {
        let labels = [1, 1, 1, 1, 1, 2, 2, 2];
        assert!(matches!(
            stratified_folds(&labels, 5, 0),
            Err(Error::ClassTooSmall { class: 2, count: 3 })
        ));
    }

    #[test]
    fn seeded() {
        let labels: Vec<u32> = (0..40).map(|i| i % 2 + 1).collect();
        let a = stratified_folds(&labels, 5, 7).unwrap();
        assert_eq!(a, stratified_folds(&labels, 5, 7).unwrap());
        assert_ne!(a, stratified_folds(&labels, 5, 8).unwrap());
    }

    proptest! {
        #[test]
        fn per_class_counts_within_one(
            labels in proptest::collection::vec(1u32..4, 12..80),
            n_folds in 2usize..5,
            seed: u64,
        ) {
            let mut labels = labels;
            // every class gets at least n_folds members
            for class in 1..4u32 {
                labels.extend(std::iter::repeat_n(class, n_folds));
            }
            let f = stratified_folds(&labels, n_folds, seed).unwrap();
            for class in 1..4u32 {
                let mut counts = vec![0usize; n_folds];
                for (l, g) in labels.iter().zip(&f) {
                    if *l == class { counts[*g] += 1; }
                }
                let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
                prop_assert!(hi - lo <= 1);
            }
        }
    }
}
