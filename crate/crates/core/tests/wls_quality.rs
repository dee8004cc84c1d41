mod common {
    pub mod scenarios;
}

use branchdepth::wls::WlsParams;
use common::scenarios::{three_branch_scene, wls_quality};

#[test]
fn smooths_homogeneous_regions_and_keeps_edges() {
    for seed in [1, 2] {
        let q = wls_quality(&three_branch_scene(seed), &WlsParams::default(), seed + 10);
        assert!(q.homogeneous_after <= 0.7 * q.homogeneous_before, "seed {seed}: {:.3} -> {:.3}", q.homogeneous_before, q.homogeneous_after);
        assert!(q.band_after <= q.band_before, "seed {seed}: band {:.3} -> {:.3}", q.band_before, q.band_after);
    }
}
