//! Write point clouds in both on-disk formats, read them back, and clean
//! special-token rows and duplicate rows before estimating.
//!
//! ```bash
//! cargo run --example pointcloud_io
//! ```

use idmem::analysis::gen_hypercube;
use idmem::estimators::Estimator;
use idmem::ingest::{clean_cloud, read_pointclouds, write_pointclouds, CloudFormat};
use idmem::model::PointCloud;

fn main() -> idmem::Result<()> {
    let dir = std::env::temp_dir().join("idmem-pointcloud-io");
    std::fs::create_dir_all(&dir).map_err(|e| idmem::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let base = gen_hypercube(4, 32, 300, 11)?;
    // Mark the first row as a BOS artifact and append a repeated row.
    let mut coords = base.coords().to_vec();
    coords.extend_from_slice(base.row(5));
    let mut mask = vec![false; base.len() + 1];
    mask[0] = true;
    let noisy = PointCloud::new("seq-0001", base.dim(), coords, mask)?;

    let bin = dir.join("clouds.idpc");
    let txt = dir.join("clouds.jsonl");
    write_pointclouds(&bin, [&noisy, &base], CloudFormat::Binary)?;
    write_pointclouds(&txt, [&noisy, &base], CloudFormat::Text)?;

    for path in [&bin, &txt] {
        let clouds = read_pointclouds(path)?;
        println!("{} ({} clouds)", path.display(), clouds.len());
        for c in &clouds {
            let (clean, rep) = clean_cloud(c)?;
            let est = Estimator::default().estimate(&clean)?;
            println!(
                "  {:<28} rows {:>4}  special -{}  dup -{}  twonn {:.2}",
                c.seq_id(),
                c.len(),
                rep.special_removed,
                rep.duplicates_removed,
                est.value
            );
        }
    }
    Ok(())
}
