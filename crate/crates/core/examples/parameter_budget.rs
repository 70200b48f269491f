//! Parameter counts of one joint convolution over all dimensions versus
//! independent per-dimension filter banks.

use oacp::convpool::{param_count_joint, param_count_perdim};

fn main() {
    let shapes = [(10000u64, 8u64, 4000u64, 3u64), (10000, 5, 4000, 3), (64, 8, 128, 3)];
    println!(
        "{:>6} {:>4} {:>6} {:>6} {:>14} {:>12}",
        "K", "l", "n", "n_bar", "joint", "per-dim"
    );
    for (k, l, n, nbar) in shapes {
        println!(
            "{k:>6} {l:>4} {n:>6} {nbar:>6} {:>14} {:>12}",
            param_count_joint(k, l, n),
            param_count_perdim(k, l, nbar)
        );
    }
}
