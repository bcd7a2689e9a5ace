use curvkit_core::frenet::{analyze_curve, CurvatureProfile, FourierSeries};
use curvkit_core::pipeline::{choose_plan, concentrate};

fn main() {
    let s = CurvatureProfile::from_fourier(vec![
        FourierSeries { constant: 1.0, cos: vec![], sin: vec![0.5] },
        FourierSeries { constant: 0.5, cos: vec![0.4], sin: vec![] },
    ]).unwrap();
    let mut plan = choose_plan(&s, 0.1).unwrap();
    plan.delta = 0.04;
    let tau = plan.tau;
    println!("t0={} u=({},{}) core=({},{}) mid=({},{}) tau={}", plan.t0, plan.u_lo, plan.u_hi, plan.core_lo, plan.core_hi, plan.mid_lo, plan.mid_hi, tau);
    let (_q, gamma) = concentrate(&plan, &s).unwrap();
    // manual coarser gamma
    for steps in [1024usize, 2048, 4096] {
        let arc_w = std::f64::consts::TAU - (plan.mid_hi - plan.mid_lo).rem_euclid(std::f64::consts::TAU);
        let va = plan.delta / arc_w;
        let grid: Vec<f64> = (0..=steps).map(|j| plan.delta * j as f64 / steps as f64).collect();
        let kap = |sig: f64| plan.modified(&s, (plan.tau + sig / va).rem_euclid(std::f64::consts::TAU));
        let (pts, _fr) = curvkit_core::frenet::synthesize_on_grid(kap, &[0.0;3], &curvkit_core::numerics::Frame::identity(3), &grid).unwrap();
        let g = curvkit_core::frenet::SampledCurve::new(3, grid, pts, false).unwrap();
        let app = analyze_curve(&g).unwrap();
        let guard2 = 12.0 * g.spacing();
        let mut worst2 = 0.0f64;
        for a in app.iter() {
            let t = (plan.tau + a.t / va).rem_euclid(std::f64::consts::TAU);
            let tl = (plan.tau + (a.t - guard2) / va).rem_euclid(std::f64::consts::TAU);
            let th = (plan.tau + (a.t + guard2) / va).rem_euclid(std::f64::consts::TAU);
            if plan.ramp(t) < 1.0 || plan.ramp(tl) < 1.0 || plan.ramp(th) < 1.0 { continue; }
            let want = s.eval(t);
            for (k, w) in a.kappas.iter().zip(want.iter()) {
                worst2 = worst2.max((k - w).abs());
            }
        }
        println!("steps {steps}: worst {worst2:.3e}");
    }
    let apparatus = analyze_curve(&gamma).unwrap();
    let arc_width = std::f64::consts::TAU - (plan.mid_hi - plan.mid_lo).rem_euclid(std::f64::consts::TAU);
    let v_arc = plan.delta / arc_width;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let guard = 12.0 * gamma.spacing();
    for a in apparatus.iter() {
        let t = (tau + a.t / v_arc).rem_euclid(std::f64::consts::TAU);
        let t_lo = (tau + (a.t - guard) / v_arc).rem_euclid(std::f64::consts::TAU);
        let t_hi = (tau + (a.t + guard) / v_arc).rem_euclid(std::f64::consts::TAU);
        if plan.ramp(t) < 1.0 || plan.ramp(t_lo) < 1.0 || plan.ramp(t_hi) < 1.0 { continue; }
        let want = s.eval(t);
        for (k, w) in a.kappas.iter().zip(want.iter()) {
            let e = (k - w).abs();
            if e > worst.0 { worst = (e, a.t, t); }
        }
    }
    println!("worst err {} at sigma {} (t {})", worst.0, worst.1, worst.2);
    // error histogram vs sigma
    let mut buckets = vec![0.0f64; 16];
    for a in apparatus.iter() {
        let t = (tau + a.t / v_arc).rem_euclid(std::f64::consts::TAU);
        let t_lo = (tau + (a.t - guard) / v_arc).rem_euclid(std::f64::consts::TAU);
        let t_hi = (tau + (a.t + guard) / v_arc).rem_euclid(std::f64::consts::TAU);
        if plan.ramp(t) < 1.0 || plan.ramp(t_lo) < 1.0 || plan.ramp(t_hi) < 1.0 { continue; }
        let want = s.eval(t);
        let b = ((a.t / plan.delta) * 16.0) as usize;
        for (c, (k, w)) in a.kappas.iter().zip(want.iter()).enumerate() {
            let e = (k - w).abs();
            if e > buckets[b.min(15)] { buckets[b.min(15)] = e; }
            let _ = c;
        }
    }
    for (i, b) in buckets.iter().enumerate() { println!("bucket {i}: {b:.2e}"); }
    // synthesize 8x finer, downsample to the same 4097 grid
    {
        let fine = 8usize;
        let steps = 4096 * fine;
        let grid: Vec<f64> = (0..=steps).map(|j| plan.delta * j as f64 / steps as f64).collect();
        let kap = |sig: f64| plan.modified(&s, (tau + sig / v_arc).rem_euclid(std::f64::consts::TAU));
        let (pts, _fr) = curvkit_core::frenet::synthesize_on_grid(kap, &[0.0;3], &curvkit_core::numerics::Frame::identity(3), &grid).unwrap();
        let mut ds_pts = Vec::new();
        let mut ds_par = Vec::new();
        for j in (0..=steps).step_by(fine) {
            ds_pts.extend_from_slice(&pts[j*3..(j+1)*3]);
            ds_par.push(grid[j]);
        }
        let g = curvkit_core::frenet::SampledCurve::new(3, ds_par, ds_pts, false).unwrap();
        let app = analyze_curve(&g).unwrap();
        let mut worst3 = 0.0f64;
        for a in app.iter() {
            let t = (tau + a.t / v_arc).rem_euclid(std::f64::consts::TAU);
            let tl = (tau + (a.t - guard) / v_arc).rem_euclid(std::f64::consts::TAU);
            let th = (tau + (a.t + guard) / v_arc).rem_euclid(std::f64::consts::TAU);
            if plan.ramp(t) < 1.0 || plan.ramp(tl) < 1.0 || plan.ramp(th) < 1.0 { continue; }
            let want = s.eval(t);
            for (k, w) in a.kappas.iter().zip(want.iter()) {
                worst3 = worst3.max((k - w).abs());
            }
        }
        println!("fine-synthesis downsampled worst: {worst3:.3e}");
    }
    println!("sigma range: 0..{}; spacing {}", plan.delta, gamma.spacing());
}
// appended experiment module
