//! Scalar maps: free iteration of `v ↦ λv + a`, and how a feedback gain
//! turns an unstable map into a contracting tracker.

use enkf_lab::dynamics::{iterate_affine, AffineMapParams, ControlledScalarMap};

fn main() {
    for params in [AffineMapParams { lambda: 0.5, a: 1.0 }, AffineMapParams { lambda: 1.0, a: 1.0 }, AffineMapParams { lambda: 1.5, a: 1.0 }] {
        let iterates: Vec<String> = [0, 1, 5, 10, 20].iter().map(|&j| format!("{:.4}", iterate_affine(&params, 0.0, j))).collect();
        println!("λ = {}: v_0, v_1, v_5, v_10, v_20 = {}   fixed point {:?}", params.lambda, iterates.join(", "), params.fixed_point());
    }

    for gain in [0.0, 0.5, 1.2] {
        let map = ControlledScalarMap { lambda: 1.2, gain };
        let e = map.tracking_errors(1.0, 0.0, 50);
        println!("K = {gain}: |λ − K| = {:.2}, |e_10| = {:.3e}, |e_50| = {:.3e}", map.error_factor().abs(), e[10].abs(), e[50].abs());
    }
}
