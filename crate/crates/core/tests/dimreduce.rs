mod common;

use oacp::dimreduce::{
    class_signatures, kmeans_objective, kmeans_partition, kmeans_run, kmeans_run_with_restarts, reduce, Aggregation,
    ReductionPartition, SignatureMatrix, DEFAULT_MAX_ITERS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ari_reference_values() {
    assert_eq!(common::adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
    assert_eq!(common::adjusted_rand_index(&[0, 0, 0], &[0, 0, 0]), 1.0);
    // index 1, expected 2*3/6 = 1, max 5/2
    assert_eq!(common::adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 0, 1]), 0.0);
}

#[test]
fn six_signatures_match_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..30u64 {
        let centers: Vec<f64> = (0..3).map(|_| rng.random_range(-20.0..20.0)).collect();
        let points: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                vec![
                    centers[i % 3] + rng.random_range(-0.2..0.2),
                    rng.random_range(-0.2..0.2),
                ]
            })
            .collect();
        let (best, best_assignment) = common::exhaustive_kmeans(&points, 3);
        let sig = SignatureMatrix::from_signatures(&points).unwrap();
        let run = kmeans_run(&sig, 3, case, DEFAULT_MAX_ITERS).unwrap();
        let got = common::wcss(&points, run.partition.assignment(), 3).unwrap();
        assert!(
            (got - best).abs() <= 1e-9 * best.max(1.0),
            "case {case}: {got} vs {best}"
        );
        assert_eq!(
            common::adjusted_rand_index(run.partition.assignment(), &best_assignment),
            1.0
        );
    }
}

#[test]
fn planted_groups_recovered_from_labeled_vectors() {
    let profiles = [[4.0, 0.0, -4.0, 1.0], [-4.0, 4.0, 0.0, 1.0], [0.0, -4.0, 4.0, -2.0]];
    let truth: Vec<usize> = (0..30).map(|i| (i * 11) % 3).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<(Vec<f64>, usize)> = (0..400)
        .map(|n| {
            let label = n % 4;
            let v = truth
                .iter()
                .map(|&g| profiles[g][label] + rng.random_range(-1.0..1.0))
                .collect();
            (v, label)
        })
        .collect();
    let sig = class_signatures(&data, 4).unwrap();
    for seed in 0..5 {
        let p = kmeans_partition(&sig, 3, seed, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(common::adjusted_rand_index(p.assignment(), &truth), 1.0);
    }
}

#[test]
fn restarts_never_worsen_the_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..20 {
        let sigs: Vec<Vec<f64>> = (0..25)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let points = sigs.clone();
        let sig = SignatureMatrix::from_signatures(&sigs).unwrap();
        let one = kmeans_run_with_restarts(&sig, 4, seed, DEFAULT_MAX_ITERS, 1).unwrap();
        let many = kmeans_run_with_restarts(&sig, 4, seed, DEFAULT_MAX_ITERS, 8).unwrap();
        let f = |r: &oacp::dimreduce::KMeansRun| kmeans_objective(&points, &r.centroids, r.partition.assignment());
        assert!(f(&many) <= f(&one));
        assert!(many.objective.windows(2).all(|w| w[1] <= w[0]));
    }
    let sig = SignatureMatrix::from_signatures(&[[0.0], [1.0]]).unwrap();
    assert!(kmeans_run_with_restarts(&sig, 1, 0, 10, 0).is_err());
}

#[test]
fn partition_file_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let p = ReductionPartition::new(vec![2, 0, 1, 1, 0], 3, Aggregation::Mean).unwrap();
    p.save(&path).unwrap();
    assert_eq!(ReductionPartition::load(&path).unwrap(), p);
    assert_eq!(reduce(&[1.0, 2.0, 3.0, 5.0, 4.0], &p).unwrap(), vec![3.0, 4.0, 1.0]);
}
