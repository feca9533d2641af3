//! Seminorm evaluation in both regimes: plain sup norms of derivatives for
//! the distribution regime, weighted quotients for the ultradifferentiable
//! regimes. Verdicts are always annotated with the derivative cap they were
//! computed under.

use std::sync::Arc;

use crate::calculus::grid::{GridFunction, Window};
use crate::error::{Error, Result};
use crate::weights::{RSequence, WeightSequence};

/// Which seminorm family a value was computed in.
#[derive(Debug, Clone)]
pub enum SeminormSpec {
    /// max_{|a| <= order} sup_K |d^a g|
    SupDerivatives { order: usize },
    /// sup_{|a| <= cap} sup_K |d^a g| / (h^|a| M_|a|)
    UltraBeurling {
        h: f64,
        cap: usize,
        weights: Arc<WeightSequence>,
    },
    /// sup_{|a| <= cap} sup_K |d^a g| / (M_|a| prod_{j<=|a|} r_j)
    UltraRoumieu {
        r: Arc<RSequence>,
        cap: usize,
        weights: Arc<WeightSequence>,
    },
}

impl SeminormSpec {
    pub fn cap(&self) -> usize {
        match self {
            SeminormSpec::SupDerivatives { order } => *order,
            SeminormSpec::UltraBeurling { cap, .. } => *cap,
            SeminormSpec::UltraRoumieu { cap, .. } => *cap,
        }
    }

    /// How much this seminorm amplifies bandwidth-level round-off noise:
    /// the largest derivative weight applied to content at the top of the
    /// resolved band.
    pub fn junk_amplification(&self, k_max: f64) -> f64 {
        match self {
            SeminormSpec::SupDerivatives { order } => k_max.powi(*order as i32),
            SeminormSpec::UltraBeurling { h, cap, weights } => {
                let mut worst = 1.0f64;
                for a in 0..=*cap {
                    if let Ok(log_m) = weights.log_m(a) {
                        let log_w = a as f64 * (k_max.ln() - h.ln()) - log_m;
                        worst = worst.max(log_w.exp());
                    }
                }
                worst
            }
            SeminormSpec::UltraRoumieu { r, cap, weights } => {
                let mut worst = 1.0f64;
                let mut cum = 0.0;
                for a in 0..=*cap {
                    cum += r.value(a).ln();
                    if let Ok(log_m) = weights.log_m(a) {
                        let log_w = a as f64 * k_max.ln() - log_m - cum;
                        worst = worst.max(log_w.exp());
                    }
                }
                worst
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SeminormSpec::SupDerivatives { order } => format!("sup-derivs<={order}"),
            SeminormSpec::UltraBeurling { h, cap, .. } => format!("ultra-h={h}-cap={cap}"),
            SeminormSpec::UltraRoumieu { cap, .. } => format!("roumieu-cap={cap}"),
        }
    }
}

/// A seminorm value plus the metadata that bounds its validity.
#[derive(Debug, Clone)]
pub struct SeminormValue {
    pub value: f64,
    /// sup_K |d^a g| per total order |a| = 0..=cap
    pub per_order: Vec<f64>,
    pub cap: usize,
    /// spectral tail within tolerance; false values flag under-resolved input
    pub resolved: bool,
}

/// Sup of |d^a g| over the probe box for every multi-index with |a| = order.
fn order_sup(g: &GridFunction, window: &Window, order: usize) -> f64 {
    let dim = g.grid.dim;
    let mut best = 0.0f64;
    if dim == 1 {
        let d = g.derivative(0, order);
        best = d.sup_on(&window.probe);
    } else {
        for a0 in 0..=order {
            let a1 = order - a0;
            let d = if a0 > 0 { g.derivative(0, a0) } else { g.clone() };
            let d = if a1 > 0 { d.derivative(1, a1) } else { d };
            best = best.max(d.sup_on(&window.probe));
        }
    }
    best
}

/// Evaluate a regime seminorm of a grid function over a probe window.
pub fn seminorm(g: &GridFunction, window: &Window, spec: &SeminormSpec) -> Result<SeminormValue> {
    if window.probe.dim != g.grid.dim {
        return Err(Error::DomainMismatch("seminorm window dimension mismatch".into()));
    }
    let tail = g.spectral_tail_fraction();
    let resolved = tail < 1e-10;
    let cap = spec.cap();
    let mut per_order = Vec::with_capacity(cap + 1);
    for order in 0..=cap {
        per_order.push(order_sup(g, window, order));
    }
    let value = match spec {
        SeminormSpec::SupDerivatives { .. } => per_order.iter().copied().fold(0.0, f64::max),
        SeminormSpec::UltraBeurling { h, weights, .. } => {
            let mut v = 0.0f64;
            for (order, sup) in per_order.iter().enumerate() {
                let log_w = order as f64 * h.ln() + weights.log_m(order)?;
                v = v.max(sup * (-log_w).exp());
            }
            v
        }
        SeminormSpec::UltraRoumieu { r, weights, .. } => {
            let mut v = 0.0f64;
            let mut cum_log_r = 0.0;
            for (order, sup) in per_order.iter().enumerate() {
                cum_log_r += if order == 0 {
                    r.value(0).ln()
                } else {
                    r.value(order).ln()
                };
                let log_w = weights.log_m(order)? + cum_log_r;
                v = v.max(sup * (-log_w).exp());
            }
            v
        }
    };
    Ok(SeminormValue {
        value,
        per_order,
        cap,
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::grid::{BoxRegion, Grid};
    use crate::weights::{build_weight_sequence, WeightKind};

    fn setup() -> (Arc<Grid>, Window) {
        let g = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 1 << 13).unwrap();
        let w = Window::new(
            BoxRegion::new_1d(-4.0, 4.0),
            BoxRegion::new_1d(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
        )
        .unwrap();
        (g, w)
    }

    #[test]
    fn constant_function_has_unit_seminorm() {
        let (g, w) = setup();
        let one = GridFunction::from_real_fn(g, |_| 1.0);
        let v = seminorm(&one, &w, &SeminormSpec::SupDerivatives { order: 4 }).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        // alpha = 0 term only: higher orders vanish
        assert!(v.per_order[1] < 1e-10);
    }

    /// sin(x) on the domain, brought to zero before the periodic seam
    fn masked_sine(g: &Arc<crate::calculus::grid::Grid>) -> GridFunction {
        let mask = crate::calculus::probes::seam_guard(g);
        GridFunction::from_real_fn(g.clone(), move |x| x[0].sin() * mask.eval(x))
    }

    #[test]
    fn sine_sup_norm_on_half_period() {
        let (g, w) = setup();
        let f = masked_sine(&g);
        let v = seminorm(&f, &w, &SeminormSpec::SupDerivatives { order: 0 }).unwrap();
        assert!((v.value - 1.0).abs() < 1e-5, "sup = {}", v.value);
    }

    #[test]
    fn gevrey2_seminorm_of_sine_is_one() {
        // weights (a!)^2 with h = 1: max over a of sup|sin^(a)| / (a!)^2 = 1 at a in {0, 1}
        let (g, w) = setup();
        let f = masked_sine(&g);
        let (weights, _) = build_weight_sequence(WeightKind::Gevrey { s: 2.0 }, 64).unwrap();
        let v = seminorm(
            &f,
            &w,
            &SeminormSpec::UltraBeurling {
                h: 1.0,
                cap: 8,
                weights,
            },
        )
        .unwrap();
        assert!((v.value - 1.0).abs() < 1e-5, "value {}", v.value);
        assert_eq!(v.cap, 8);
    }

    #[test]
    fn unresolved_input_is_flagged() {
        let g = Grid::new(BoxRegion::new_1d(-4.0, 4.0), 256).unwrap();
        let w = Window::new(BoxRegion::new_1d(-4.0, 4.0), BoxRegion::new_1d(-1.0, 1.0)).unwrap();
        let rough = GridFunction::from_real_fn(g, |x| if x[0] > 0.0 { 1.0 } else { 0.0 });
        let v = seminorm(&rough, &w, &SeminormSpec::SupDerivatives { order: 2 }).unwrap();
        assert!(!v.resolved);
    }
}
