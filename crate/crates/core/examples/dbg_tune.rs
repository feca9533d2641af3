// tuning: TO2 decay slope vs localization radius for power-law radius nets
use colombeau_core::calculus::grid::*;
use colombeau_core::calculus::probes;
use colombeau_core::regularization::mollifier::*;
use colombeau_core::weights::RNet;

fn main() {
    let grid = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 14).unwrap();
    let w = Window::new(BoxRegion::new_1d(-4.0, 4.0), BoxRegion::new_1d(-1.4, 1.4)).unwrap();
    let gauss = probes::smooth_probe(&grid, "gaussian").unwrap();
    for beta in [0.5, 0.4, 0.35, 0.25] {
        let mut params = MollifierParams::distribution_default();
        params.rnet = RNet::power(beta, 1.0);
        let mut rows = Vec::new();
        for k in 2..=10 {
            let eps = 2f64.powi(-k);
            let op = MollifierOp::build(grid.clone(), &params, eps).unwrap();
            let defect = (op.theta.integral().re - 1.0).abs();
            let out = op.apply_smooth(&gauss).unwrap();
            let to2 = out.sub(&gauss).unwrap().sup_on(&w.probe);
            rows.push((eps, defect, to2, op.support_radius()));
        }
        // trailing-half log-log slopes
        let slope = |vals: Vec<(f64, f64)>| -> f64 {
            let pts: Vec<(f64, f64)> = vals.iter().filter(|&&(_, v)| v > 1e-13)
                .map(|&(e, v)| (e.ln(), v.ln())).collect();
            if pts.len() < 3 { return f64::INFINITY; }
            let tail = &pts[pts.len()/2..];
            let n = tail.len() as f64;
            let sx: f64 = tail.iter().map(|p| p.0).sum();
            let sy: f64 = tail.iter().map(|p| p.1).sum();
            let sxx: f64 = tail.iter().map(|p| p.0*p.0).sum();
            let sxy: f64 = tail.iter().map(|p| p.0*p.1).sum();
            (n*sxy - sx*sy)/(n*sxx - sx*sx)
        };
        let s_defect = slope(rows.iter().map(|r| (r.0, r.1)).collect());
        let s_to2 = slope(rows.iter().map(|r| (r.0, r.2)).collect());
        println!("beta={beta}: defect slope {s_defect:.2}, to2 slope {s_to2:.2}, radius at 2^-9/2^-10: {:.3}/{:.3}",
                 rows[7].3, rows[8].3);
        for r in &rows { println!("   eps={:.5} defect={:.3e} to2={:.3e}", r.0, r.1, r.2); }
    }
}
