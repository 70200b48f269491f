//! Learns a partition of 24 feature dimensions into 3 groups from class-mean
//! signatures, then reduces a sequence with it.
//!
//! The data has three hidden dimension groups; each group's mean value
//! depends on the class in a different way.

use oacp::dimreduce::{class_signatures, kmeans_run, reduce_sequence, Aggregation, DEFAULT_MAX_ITERS};
use oacp::seq::FeatureSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const PROFILES: [[f64; 3]; 3] = [[3.0, 0.0, -3.0], [-3.0, 3.0, 0.0], [0.0, -3.0, 3.0]];

fn main() -> oacp::Result<()> {
    let dim = 24;
    let hidden: Vec<usize> = (0..dim).map(|i| (i * 7) % 3).collect();
    let noise = Normal::new(0.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut vectors = Vec::new();
    for n in 0..300 {
        let label = n % 3;
        let v: Vec<f64> = hidden
            .iter()
            .map(|&g| PROFILES[g][label] + noise.sample(&mut rng))
            .collect();
        vectors.push((v, label));
    }

    let sig = class_signatures(&vectors, 3)?;
    let run = kmeans_run(&sig, 3, 0, DEFAULT_MAX_ITERS)?;
    println!("hidden   {hidden:?}");
    println!("learned  {:?}", run.partition.assignment());
    println!("converged={} after {} iterations", run.converged, run.iterations);
    println!("objective {:?}", run.objective);

    let partition = run.partition.with_aggregation(Aggregation::Mean);
    let frames: Vec<&[f64]> = vectors.iter().take(4).map(|(v, _)| v.as_slice()).collect();
    let seq = FeatureSequence::from_frames(&frames)?;
    let reduced = reduce_sequence(&seq, &partition)?;
    println!(
        "reduced {}x{} to {}x{}:",
        seq.len(),
        seq.dim(),
        reduced.len(),
        reduced.dim()
    );
    for f in reduced.frames() {
        println!("  {f:.2?}");
    }
    Ok(())
}
