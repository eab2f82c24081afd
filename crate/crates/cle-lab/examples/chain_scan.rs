//! Scratch: scan seeds for origin chains that resolve at given depths.
use cle_lab::cle::origin_chain;
use cle_lab::geom::Domain;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let depth: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let hi: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);
    let t0 = std::time::Instant::now();
    let mut ok = 0;
    for seed in 0..hi {
        match origin_chain(6.0, &Domain::Disk, depth, 4e-3, seed) {
            Ok(ch) => {
                ok += 1;
                let radii: Vec<f64> = (0..depth).map(|i| ch.conformal_radius(i)).collect();
                let diams: Vec<f64> = ch.loops.iter().map(|l| l.diameter()).collect();
                println!("seed {seed}: OK radii {radii:?} diams {diams:?}");
            }
            Err(e) => println!("seed {seed}: {e}"),
        }
    }
    println!("{ok}/{hi} resolved at depth {depth}, {:?}", t0.elapsed());
}
