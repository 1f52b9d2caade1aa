//! Recover the dimension of uniform hypercubes embedded in 64 coordinates.
//!
//! ```bash
//! cargo run --release --example estimate_hypercube
//! ```

use idmem::analysis::{gen_hypercube, gen_sphere_surface};
use idmem::estimators::{mle_levina_bickel, pca_baseline, twonn, MleParams, TwoNNParams};
use idmem::model::TwoNNFit;

fn main() -> idmem::Result<()> {
    println!("{:<22} {:>8} {:>8} {:>8} {:>8}", "cloud", "twonn", "twonn-ls", "mle k=10", "pca .95");
    let ls = TwoNNParams {
        fit: TwoNNFit::LeastSquares,
        ..Default::default()
    };
    for d in [2, 5, 9] {
        for (name, cloud) in [
            (format!("hypercube d={d}"), gen_hypercube(d, 64, 2000, 7)?),
            (format!("sphere d={d}"), gen_sphere_surface(d, 64, 2000, 7)?),
        ] {
            println!(
                "{:<22} {:>8.2} {:>8.2} {:>8.2} {:>8.0}",
                name,
                twonn(&cloud, TwoNNParams::default())?.value,
                twonn(&cloud, ls)?.value,
                mle_levina_bickel(&cloud, MleParams::default())?.value,
                pca_baseline(&cloud, 0.95)?.value,
            );
        }
    }
    Ok(())
}
