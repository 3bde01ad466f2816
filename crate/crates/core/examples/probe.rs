use qkdlab_core::channel::ChannelParams;
use qkdlab_core::mdi::{mdi_observables, mdi_true_fractions, mdi_yield_bounds, solve_yield_max};

fn main() {
    for km in [0.0, 50.0, 100.0] {
        let p = ChannelParams::mdi_defaults().at_distance(km);
        let obs = mdi_observables(&p).unwrap();
        let b = mdi_yield_bounds(&obs, 7).unwrap();
        let (d00, d01, d10, d11, dmm) = mdi_true_fractions(&p).unwrap();
        println!("km={km}");
        println!("  y00max={:.6e} y01max={:.6e} y10max={:.6e} y11max={:.6e} gap={:.3e}", b.y00_max, b.y01_max, b.y10_max, b.y11_max, b.duality_gap_max);
        println!("  d00  bound={:.10e} true={:.10e} ok={}", b.delta00_max, d00, b.delta00_max >= d00);
        println!("  d01  bound={:.10e} true={:.10e} ok={}", b.delta01_max, d01, b.delta01_max >= d01);
        println!("  d10  bound={:.10e} true={:.10e} ok={}", b.delta10_max, d10, b.delta10_max >= d10);
        println!("  d11  bound={:.10e} true={:.10e} ok={}", b.delta11_max, d11, b.delta11_max >= d11);
        println!("  dmm  bound={:.10e} true={:.10e} ok={}", b.delta_mm_min, dmm, b.delta_mm_min <= dmm);
        for t in [(0usize,0usize),(0,1),(1,0),(1,1)] {
            let s = solve_yield_max(&obs, t, 7).unwrap();
            println!("  solve {:?}: obj={:.12e} gap={:.3e} infeas={:.3e} iters={}", t, s.objective, s.duality_gap, s.max_infeasibility, s.iterations);
        }
    }
}
