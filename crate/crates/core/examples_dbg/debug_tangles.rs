use tanglekit::fixtures;
use tanglekit::tangle::{enumerate_tangles, maximal_tangles};

fn main() {
    let sys = fixtures::bridged_k4s();
    for k in 1..=5 {
        let ts = enumerate_tangles(&sys, k);
        println!("order {k}: {} tangles", ts.len());
        for t in &ts {
            println!("  {}", t.describe(&sys));
        }
    }
    println!("maximal:");
    for t in maximal_tangles(&sys) {
        println!("  {}", t.describe(&sys));
    }
}
