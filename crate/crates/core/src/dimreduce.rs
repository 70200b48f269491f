//! Supervised dimensionality reduction by clustering class-mean signatures.
//!
//! The per-class means of a labeled set form a `c x D` matrix; column `i` is
//! the signature of dimension `i`. Clustering the `D` signatures into `k`
//! groups with k-means gives a partition of the dimensions, and a vector is
//! reduced by aggregating the values within each group.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seq::FeatureSequence;

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_RESTARTS: usize = 10;

/// Class-mean matrix, `c x D` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureMatrix {
    means: Vec<f64>,
    classes: usize,
    dim: usize,
}

impl SignatureMatrix {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mean feature vector of class `j`.
    pub fn class_mean(&self, j: usize) -> &[f64] {
        &self.means[j * self.dim..(j + 1) * self.dim]
    }

    /// Signature of dimension `i`: its mean value in every class.
    pub fn signature(&self, i: usize) -> Vec<f64> {
        (0..self.classes).map(|j| self.means[j * self.dim + i]).collect()
    }

    /// Builds a matrix directly from signatures (one `c`-vector per dimension).
    pub fn from_signatures<R: AsRef<[f64]>>(signatures: &[R]) -> Result<Self> {
        let dim = signatures.len();
        let classes = signatures.first().map_or(0, |s| s.as_ref().len());
        if dim == 0 || classes == 0 {
            return Err(Error::invalid("signatures", "need at least one dimension and class"));
        }
        let mut means = vec![0.0; classes * dim];
        for (i, s) in signatures.iter().enumerate() {
            let s = s.as_ref();
            if s.len() != classes {
                return Err(Error::LengthMismatch {
                    expected: classes,
                    actual: s.len(),
                });
            }
            for (j, v) in s.iter().enumerate() {
                means[j * dim + i] = *v;
            }
        }
        Ok(Self { means, classes, dim })
    }

    /// Rescales every signature to unit L2 norm (zero signatures untouched).
    pub fn normalized(&self) -> Self {
        let sigs: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| crate::seq::l2_normalize_block(&self.signature(i)))
            .collect();
        Self::from_signatures(&sigs).expect("shape preserved")
    }
}

/// Per-class means of labeled vectors. Every class in `0..classes` must have
/// at least one vector.
pub fn class_signatures<V: AsRef<[f64]>>(data: &[(V, usize)], classes: usize) -> Result<SignatureMatrix> {
    let dim = data
        .first()
        .map(|(v, _)| v.as_ref().len())
        .ok_or_else(|| Error::invalid("signature data", "no vectors"))?;
    if dim == 0 {
        return Err(Error::invalid("signature data", "vectors must be nonempty"));
    }
    let mut sums = vec![0.0; classes * dim];
    let mut counts = vec![0usize; classes];
    for (v, label) in data {
        let v = v.as_ref();
        if *label >= classes {
            return Err(Error::LabelOutOfRange { label: *label, classes });
        }
        if v.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        counts[*label] += 1;
        for (s, x) in sums[label * dim..(label + 1) * dim].iter_mut().zip(v) {
            *s += x;
        }
    }
    if let Some(missing) = counts.iter().position(|&n| n == 0) {
        return Err(Error::MissingClass(missing));
    }
    for (j, &n) in counts.iter().enumerate() {
        sums[j * dim..(j + 1) * dim].iter_mut().for_each(|s| *s /= n as f64);
    }
    Ok(SignatureMatrix {
        means: sums,
        classes,
        dim,
    })
}

/// How values within a group are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::invalid("aggregation", format!("unknown {s:?}"))),
        }
    }
}

/// Assignment of `D` dimensions to `k` nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionPartition {
    assignment: Vec<usize>,
    groups: usize,
    aggregation: Aggregation,
    sizes: Vec<usize>,
}

impl ReductionPartition {
    pub fn new(assignment: Vec<usize>, groups: usize, aggregation: Aggregation) -> Result<Self> {
        if groups == 0 || groups > assignment.len() {
            return Err(Error::invalid(
                "partition",
                format!("{groups} groups for {} dimensions", assignment.len()),
            ));
        }
        let mut sizes = vec![0; groups];
        for (i, &g) in assignment.iter().enumerate() {
            if g >= groups {
                return Err(Error::invalid(
                    "partition",
                    format!("dimension {i} assigned to group {g}"),
                ));
            }
            sizes[g] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::invalid("partition", format!("group {empty} is empty")));
        }
        Ok(Self {
            assignment,
            groups,
            aggregation,
            sizes,
        })
    }

    /// Every dimension its own group.
    pub fn identity(dim: usize, aggregation: Aggregation) -> Result<Self> {
        Self::new((0..dim).collect(), dim, aggregation)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Target dimensionality `k`.
    pub fn groups(&self) -> usize {
        self.groups
    }

    /// Original dimensionality `D`.
    pub fn dim(&self) -> usize {
        self.assignment.len()
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    /// Text form: header `k=<k> D=<D> aggregation=<sum|mean>`, then the
    /// group index of each dimension on its own line.
    pub fn to_text(&self) -> String {
        let mut out = format!("k={} D={} aggregation={}\n", self.groups, self.dim(), self.aggregation);
        for g in &self.assignment {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "empty partition file".into()))?;
        let (mut k, mut d, mut agg) = (None, None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("k", v)) => k = v.parse::<usize>().ok(),
                Some(("D", v)) => d = v.parse::<usize>().ok(),
                Some(("aggregation", v)) => agg = v.parse::<Aggregation>().ok(),
                _ => return Err(err(1, format!("unexpected header field {field:?}"))),
            }
        }
        let (Some(k), Some(d), Some(agg)) = (k, d, agg) else {
            return Err(err(1, "header must be `k=<k> D=<D> aggregation=<sum|mean>`".into()));
        };
        let mut assignment = Vec::with_capacity(d);
        for (i, line) in lines.enumerate() {
            let g = line
                .trim()
                .parse::<usize>()
                .map_err(|e| err(i + 2, format!("bad group index {line:?}: {e}")))?;
            assignment.push(g);
        }
        if assignment.len() != d {
            return Err(err(
                d + 2,
                format!("expected {d} assignments, found {}", assignment.len()),
            ));
        }
        Self::new(assignment, k, agg).map_err(|e| err(1, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// Trace of a k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub partition: ReductionPartition,
    /// `groups x c` row-major.
    pub centroids: Vec<f64>,
    /// Within-cluster sum of squares after every iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Within-cluster sum of squared distances of each point to its centroid.
pub fn kmeans_objective(points: &[Vec<f64>], centroids: &[f64], assignment: &[usize]) -> f64 {
    let c = points.first().map_or(0, Vec::len);
    points
        .iter()
        .zip(assignment)
        .map(|(p, &g)| sq_dist(p, &centroids[g * c..(g + 1) * c]))
        .sum()
}

fn nearest(point: &[f64], centroids: &[f64], c: usize) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (g, cen) in centroids.chunks_exact(c).enumerate() {
        let d = sq_dist(point, cen);
        if d < best_d {
            best = g;
            best_d = d;
        }
    }
    best
}

fn kmeans_pp_seed(points: &[Vec<f64>], groups: usize, rng: &mut impl Rng) -> Vec<f64> {
    let c = points[0].len();
    let mut centroids = Vec::with_capacity(groups * c);
    let first = rng.random_range(0..points.len());
    centroids.extend_from_slice(&points[first]);
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    for _ in 1..groups {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = dist.len() - 1;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // rounding can leave the target past the last positive weight
            if dist[chosen] == 0.0 {
                chosen = dist.iter().rposition(|&d| d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let start = centroids.len();
        centroids.extend_from_slice(&points[pick]);
        let cen = centroids[start..].to_vec();
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &cen));
        }
    }
    centroids
}

/// Lloyd's k-means over the `D` signatures with k-means++ seeding, keeping
/// the best of [`DEFAULT_RESTARTS`] seeded restarts.
///
/// Ties in nearest-centroid assignment go to the lowest centroid index. An
/// empty cluster is refilled with the point farthest from its centroid
/// (taken from a cluster with at least two members). Iteration stops when
/// assignments no longer change or after `max_iters` rounds.
pub fn kmeans_run(sig: &SignatureMatrix, groups: usize, seed: u64, max_iters: usize) -> Result<KMeansRun> {
    kmeans_run_with_restarts(sig, groups, seed, max_iters, DEFAULT_RESTARTS)
}

/// As [`kmeans_run`] with an explicit restart count. Restarts draw from one
/// seeded stream in sequence; the run with the lowest final objective wins,
/// the earliest on ties.
pub fn kmeans_run_with_restarts(
    sig: &SignatureMatrix,
    groups: usize,
    seed: u64,
    max_iters: usize,
    restarts: usize,
) -> Result<KMeansRun> {
    let points: Vec<Vec<f64>> = (0..sig.dim()).map(|i| sig.signature(i)).collect();
    if groups == 0 || groups > points.len() {
        return Err(Error::invalid(
            "target dimension",
            format!("k={groups} must lie in [1, {}]", points.len()),
        ));
    }
    if max_iters == 0 {
        return Err(Error::invalid("max_iters", "must be at least 1"));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansRun> = None;
    for _ in 0..restarts {
        let run = lloyd(&points, groups, max_iters, &mut rng)?;
        if best.as_ref().is_none_or(|b| final_objective(&run) < final_objective(b)) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn final_objective(run: &KMeansRun) -> f64 {
    run.objective.last().copied().unwrap_or(f64::INFINITY)
}

fn lloyd(points: &[Vec<f64>], groups: usize, max_iters: usize, rng: &mut impl Rng) -> Result<KMeansRun> {
    let c = points[0].len();
    let mut centroids = kmeans_pp_seed(points, groups, rng);
    let mut assignment: Vec<usize> = vec![usize::MAX; points.len()];
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids, c)).collect();
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
        repair_empty(points, &centroids, &mut assignment, groups);
        centroids = update_centroids(points, &assignment, groups, c);
        objective.push(kmeans_objective(points, &centroids, &assignment));
    }

    let partition = ReductionPartition::new(assignment, groups, Aggregation::Sum)?;
    Ok(KMeansRun {
        partition,
        centroids,
        objective,
        iterations,
        converged,
    })
}

fn repair_empty(points: &[Vec<f64>], centroids: &[f64], assignment: &mut [usize], groups: usize) {
    let c = points[0].len();
    let mut sizes = vec![0usize; groups];
    for &g in assignment.iter() {
        sizes[g] += 1;
    }
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, (p, &g)) in points.iter().zip(assignment.iter()).enumerate() {
            if sizes[g] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[g * c..(g + 1) * c]);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let i = far.expect("k <= D leaves a cluster with two members");
        sizes[assignment[i]] -= 1;
        assignment[i] = empty;
        sizes[empty] = 1;
    }
}

fn update_centroids(points: &[Vec<f64>], assignment: &[usize], groups: usize, c: usize) -> Vec<f64> {
    let mut sums = vec![0.0; groups * c];
    let mut counts = vec![0usize; groups];
    for (p, &g) in points.iter().zip(assignment) {
        counts[g] += 1;
        for (s, x) in sums[g * c..(g + 1) * c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (g, &n) in counts.iter().enumerate() {
        sums[g * c..(g + 1) * c].iter_mut().for_each(|s| *s /= n as f64);
    }
    sums
}

/// Groups the `D` dimensions into `k` clusters of similar signatures.
pub fn kmeans_partition(
    sig: &SignatureMatrix,
    groups: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ReductionPartition> {
    Ok(kmeans_run(sig, groups, seed, max_iters)?.partition)
}

pub fn kmeans_partition_with_restarts(
    sig: &SignatureMatrix,
    groups: usize,
    seed: u64,
    max_iters: usize,
    restarts: usize,
) -> Result<ReductionPartition> {
    Ok(kmeans_run_with_restarts(sig, groups, seed, max_iters, restarts)?.partition)
}

/// Aggregates `x` within each group of `p`.
pub fn reduce(x: &[f64], p: &ReductionPartition) -> Result<Vec<f64>> {
    if x.len() != p.dim() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            actual: x.len(),
        });
    }
    let mut out = vec![0.0; p.groups];
    for (v, &g) in x.iter().zip(&p.assignment) {
        out[g] += v;
    }
    if p.aggregation == Aggregation::Mean {
        for (o, &n) in out.iter_mut().zip(&p.sizes) {
            *o /= n as f64;
        }
    }
    Ok(out)
}

/// Applies [`reduce`] to every frame.
pub fn reduce_sequence(seq: &FeatureSequence, p: &ReductionPartition) -> Result<FeatureSequence> {
    if seq.dim() != p.dim() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            actual: seq.dim(),
        });
    }
    seq.map_frames(p.groups, |f| reduce(f, p).expect("width checked"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(rng: &mut impl Rng, centers: &[[f64; 2]], per: usize, spread: f64) -> (SignatureMatrix, Vec<usize>) {
        let mut sigs = Vec::new();
        let mut truth = Vec::new();
        for (g, c) in centers.iter().enumerate() {
            for _ in 0..per {
                sigs.push(vec![
                    c[0] + rng.random_range(-spread..spread),
                    c[1] + rng.random_range(-spread..spread),
                ]);
                truth.push(g);
            }
        }
        (SignatureMatrix::from_signatures(&sigs).unwrap(), truth)
    }

    #[test]
    fn signature_examples() {
        let data = vec![(vec![1.0, 2.0], 0), (vec![3.0, 4.0], 1)];
        let s = class_signatures(&data, 2).unwrap();
        assert_eq!(s.class_mean(0), &[1.0, 2.0]);
        assert_eq!(s.class_mean(1), &[3.0, 4.0]);
        assert_eq!(s.signature(1), vec![2.0, 4.0]);

        let data = vec![(vec![0.0, 2.0], 0), (vec![2.0, 0.0], 0), (vec![5.0, 5.0], 1)];
        assert_eq!(class_signatures(&data, 2).unwrap().class_mean(0), &[1.0, 1.0]);

        assert!(matches!(class_signatures(&data, 3), Err(Error::MissingClass(2))));
        let bad: Vec<(Vec<f64>, usize)> = vec![(vec![1.0], 4)];
        assert!(matches!(class_signatures(&bad, 2), Err(Error::LabelOutOfRange { .. })));
    }

    #[test]
    fn k_equals_d_isolates_every_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (sig, _) = planted(&mut rng, &[[0.0, 0.0], [5.0, 5.0]], 3, 1.0);
        let p = kmeans_partition(&sig, 6, 3, DEFAULT_MAX_ITERS).unwrap();
        let mut seen = p.assignment().to_vec();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn k_equals_one_merges_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (sig, _) = planted(&mut rng, &[[0.0, 0.0], [5.0, 5.0]], 4, 1.0);
        let p = kmeans_partition(&sig, 1, 0, DEFAULT_MAX_ITERS).unwrap();
        assert!(p.assignment().iter().all(|&g| g == 0));
    }

    #[test]
    fn invalid_targets_rejected() {
        let sig = SignatureMatrix::from_signatures(&[[1.0], [2.0]]).unwrap();
        assert!(kmeans_partition(&sig, 3, 0, 10).is_err());
        assert!(kmeans_partition(&sig, 0, 0, 10).is_err());
        assert!(kmeans_partition(&sig, 1, 0, 0).is_err());
    }

    #[test]
    fn duplicate_signatures_still_fill_every_group() {
        let sig = SignatureMatrix::from_signatures(&[[1.0, 1.0]; 5]).unwrap();
        for seed in 0..10 {
            let p = kmeans_partition(&sig, 3, seed, DEFAULT_MAX_ITERS).unwrap();
            assert_eq!(p.groups(), 3);
        }
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (sig, _) = planted(&mut rng, &[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [2.0, 2.0]], 6, 2.0);
            let run = kmeans_run(&sig, 4, seed, DEFAULT_MAX_ITERS).unwrap();
            for w in run.objective.windows(2) {
                assert!(w[1] <= w[0], "seed {seed}: {:?}", run.objective);
            }
            assert!(run.converged);
        }
    }

    #[test]
    fn same_seed_same_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (sig, _) = planted(&mut rng, &[[0.0, 0.0], [1.0, 1.0]], 10, 1.0);
        let a = kmeans_partition(&sig, 3, 99, DEFAULT_MAX_ITERS).unwrap();
        let b = kmeans_partition(&sig, 3, 99, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduce_examples() {
        let x = [1.0, -2.0, 4.0];
        let id = ReductionPartition::identity(3, Aggregation::Sum).unwrap();
        assert_eq!(reduce(&x, &id).unwrap(), x.to_vec());
        let one = ReductionPartition::new(vec![0, 0, 0], 1, Aggregation::Sum).unwrap();
        assert_eq!(reduce(&x, &one).unwrap(), vec![3.0]);
        let mean = one.clone().with_aggregation(Aggregation::Mean);
        assert_eq!(reduce(&x, &mean).unwrap(), vec![1.0]);
        assert!(reduce(&[1.0], &one).is_err());
    }

    #[test]
    fn reduce_is_linear_on_exact_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = ReductionPartition::new(vec![0, 1, 0, 2, 1, 2, 2], 3, Aggregation::Sum).unwrap();
        for _ in 0..50 {
            // small integers keep every sum exact
            let x: Vec<f64> = (0..7).map(|_| rng.random_range(-100i32..100) as f64).collect();
            let y: Vec<f64> = (0..7).map(|_| rng.random_range(-100i32..100) as f64).collect();
            let (a, b) = (3.0, -2.0);
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = reduce(&combo, &p).unwrap();
            let rx = reduce(&x, &p).unwrap();
            let ry = reduce(&y, &p).unwrap();
            let rhs: Vec<f64> = rx.iter().zip(&ry).map(|(u, v)| a * u + b * v).collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn reduce_sequence_examples() {
        let seq = FeatureSequence::from_frames(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let id = ReductionPartition::identity(3, Aggregation::Sum).unwrap();
        assert_eq!(reduce_sequence(&seq, &id).unwrap(), seq);
        let one = ReductionPartition::new(vec![0, 0, 0], 1, Aggregation::Sum).unwrap();
        assert_eq!(reduce_sequence(&seq, &one).unwrap().as_flat(), &[6.0, 15.0]);
        let single = FeatureSequence::from_frames(&[[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(reduce_sequence(&single, &one).unwrap().len(), 1);
    }

    #[test]
    fn partition_validation() {
        assert!(ReductionPartition::new(vec![0, 0], 2, Aggregation::Sum).is_err());
        assert!(ReductionPartition::new(vec![0, 2], 2, Aggregation::Sum).is_err());
        assert!(ReductionPartition::new(vec![0], 2, Aggregation::Sum).is_err());
    }

    #[test]
    fn partition_text_round_trip_and_errors() {
        let p = ReductionPartition::new(vec![1, 0, 2, 1], 3, Aggregation::Mean).unwrap();
        let text = p.to_text();
        assert!(text.starts_with("k=3 D=4 aggregation=mean\n"));
        let path = Path::new("p.txt");
        assert_eq!(ReductionPartition::parse(&text, path).unwrap(), p);
        assert!(ReductionPartition::parse("", path).is_err());
        assert!(ReductionPartition::parse("k=2 D=2\n0\n1\n", path).is_err());
        let err = ReductionPartition::parse("k=2 D=3 aggregation=sum\n0\nx\n1\n", path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(ReductionPartition::parse("k=2 D=3 aggregation=sum\n0\n1\n", path).is_err());
    }
}
