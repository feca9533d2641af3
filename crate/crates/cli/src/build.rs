//! Construction of core objects from a scenario config: grid, scale pair,
//! certified net families, expressions, operators and diffeomorphisms.

use std::sync::Arc;

use colombeau_core::basic_space::{GFExpr, MultiLinear};
use colombeau_core::calculus::coeff::SmoothCoeff;
use colombeau_core::calculus::diffeo::{Diffeo, Diffeo1D};
use colombeau_core::calculus::grid::{BoxRegion, Grid, Window};
use colombeau_core::calculus::mask::SmoothMask;
use colombeau_core::calculus::probes;
use colombeau_core::calculus::linop::LinOpSpec;
use colombeau_core::calculus::seminorm::SeminormSpec;
use colombeau_core::error::{Error, Result};
use colombeau_core::quotient::{Caps, RegimeConfig};
use colombeau_core::regularization::{
    build_mollifier_net, transform_net, verify_test_object, zero_net, MollifierParams, Regime,
    RegNet, TransformSpec, VerifyConfig,
};
use colombeau_core::scales::{
    make_polynomial_pair, make_ultra_pair, ScalePair, UltraFlavor,
};
use colombeau_core::sweep::ExecMode;
use colombeau_core::weights::{
    build_weight_sequence, r_net, RNet, RNetConfig, RSequence, WeightKind,
};

use crate::config::{ExprBlock, RNetBlock, Scenario};

/// Everything a scenario run needs, built once from the config.
pub struct Workbench {
    pub grid: Arc<Grid>,
    pub domain: BoxRegion,
    pub eps: Vec<f64>,
    pub params: MollifierParams,
    pub scale: Arc<ScalePair>,
    pub windows: Vec<Window>,
    pub seminorms: Vec<SeminormSpec>,
    pub caps: Caps,
    pub to2_slope: f64,
    pub seed: u64,
    pub exec: ExecMode,
    families: std::cell::RefCell<Option<(Vec<Arc<RegNet>>, Vec<Arc<RegNet>>)>>,
}

pub fn rfamily() -> Vec<Arc<RSequence>> {
    vec![
        RSequence::power(0.25),
        RSequence::power(0.5),
        RSequence::power(1.0),
    ]
}

impl Workbench {
    pub fn from_scenario(sc: &Scenario, eps_min_override: Option<f64>) -> Result<Workbench> {
        if sc.domain.r#box.is_empty() || sc.domain.r#box.len() > 2 {
            return Err(Error::Config("domain must have one or two axes".into()));
        }
        let domain = if sc.domain.r#box.len() == 1 {
            BoxRegion::new_1d(sc.domain.r#box[0][0], sc.domain.r#box[0][1])
        } else {
            BoxRegion::new_2d(
                [sc.domain.r#box[0][0], sc.domain.r#box[1][0]],
                [sc.domain.r#box[0][1], sc.domain.r#box[1][1]],
            )
        };
        let grid = Grid::new(domain, sc.domain.n)?;
        let mut eps: Vec<f64> = (sc.domain.eps_pow2[0]..=sc.domain.eps_pow2[1])
            .map(|k| 2f64.powi(-(k as i32)))
            .collect();
        if let Some(e_min) = eps_min_override {
            eps.retain(|&e| e >= e_min);
            if eps.len() < 5 {
                return Err(Error::Config("eps-min leaves fewer than five grid points".into()));
            }
        }

        let (regime, params, scale, weights) = match sc.regime.kind.as_str() {
            "distribution" => {
                let mut params = MollifierParams::distribution_default();
                if let Some(r) = &sc.regime.rnet {
                    params.rnet = parse_rnet(r, &eps)?;
                }
                let scale = Arc::new(make_polynomial_pair(&eps)?);
                (Regime::Distribution, params, scale, None)
            }
            "gevrey-beurling" | "gevrey-roumieu" => {
                let s = sc.regime.s;
                let s_chi = sc.regime.s_chi;
                let (w, report) = build_weight_sequence(WeightKind::Gevrey { s }, 4096)?;
                if !report.m1.passed || !report.m2.passed {
                    return Err(Error::Config("weight sequence failed (M.1)/(M.2)".into()));
                }
                let (n_seq, _) = build_weight_sequence(WeightKind::Gevrey { s: s_chi }, 4096)?;
                let rnet = match &sc.regime.rnet {
                    Some(r) if r.kind == "power" => parse_rnet(r, &eps)?,
                    _ => r_net(w.clone(), n_seq, RNetConfig::default(), &eps)?.0,
                };
                let (regime, flavor) = if sc.regime.kind == "gevrey-beurling" {
                    (Regime::GevreyBeurling { s }, UltraFlavor::Beurling)
                } else {
                    (Regime::GevreyRoumieu { s }, UltraFlavor::Roumieu)
                };
                let params = MollifierParams::gevrey_default(regime.clone(), s_chi, rnet)?;
                let scale = Arc::new(make_ultra_pair(w.clone(), flavor, &rfamily(), &eps)?);
                (regime, params, scale, Some(w))
            }
            other => return Err(Error::Config(format!("unknown regime kind {other:?}"))),
        };
        let _ = regime;

        let mut windows = Vec::new();
        for w in &sc.windows {
            let probe = if w.probe.len() == 1 {
                BoxRegion::new_1d(w.probe[0][0], w.probe[0][1])
            } else {
                BoxRegion::new_2d(
                    [w.probe[0][0], w.probe[1][0]],
                    [w.probe[0][1], w.probe[1][1]],
                )
            };
            windows.push(Window::new(domain, probe)?);
        }
        if windows.is_empty() {
            windows.push(colombeau_core::regularization::standard_window(&grid)?);
        }

        let seminorms = match sc.regime.kind.as_str() {
            "distribution" => sc
                .seminorm_orders
                .iter()
                .map(|&order| SeminormSpec::SupDerivatives { order })
                .collect(),
            "gevrey-beurling" => {
                let w = weights.clone().unwrap();
                [0.5, 1.0, 2.0]
                    .iter()
                    .map(|&h| SeminormSpec::UltraBeurling {
                        h,
                        cap: 6,
                        weights: w.clone(),
                    })
                    .collect()
            }
            _ => {
                let w = weights.clone().unwrap();
                rfamily()
                    .into_iter()
                    .map(|r| SeminormSpec::UltraRoumieu {
                        r,
                        cap: 6,
                        weights: w.clone(),
                    })
                    .collect()
            }
        };

        Ok(Workbench {
            grid,
            domain,
            eps,
            params,
            scale,
            windows,
            seminorms,
            caps: Caps {
                l_max: sc.caps.l_max,
                k_max: sc.caps.k_max,
                derivative_cap: sc.caps.derivative_cap,
            },
            to2_slope: sc.caps.to2_slope,
            seed: sc.seed,
            exec: ExecMode::Parallel,
            families: std::cell::RefCell::new(None),
        })
    }

    /// Certified (growth, decay) net families: the mollifier as the test
    /// object, the zero net and the derivative commutator as 0-test objects.
    pub fn certified_families(&self) -> Result<(Vec<Arc<RegNet>>, Vec<Arc<RegNet>>)> {
        if let Some(f) = self.families.borrow().as_ref() {
            return Ok(f.clone());
        }
        let mut mollifier = build_mollifier_net(self.grid.clone(), &self.params, &self.eps)?;
        let vc = self.verify_config()?;
        let report = verify_test_object(&mut mollifier, &vc)?;
        if !report.passed {
            return Err(Error::Config(format!(
                "canonical mollifier net failed the test-object axioms: {:?}",
                report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| format!("{}:{}", c.probe, c.detail))
                    .collect::<Vec<_>>()
            )));
        }
        let mut zero = zero_net(self.grid.clone(), &self.eps);
        let zr = verify_test_object(&mut zero, &vc)?;
        if !zr.passed {
            return Err(Error::Config("zero net failed its axioms".into()));
        }
        let mut comm = transform_net(
            &TransformSpec::Commutator {
                op: LinOpSpec::PartialDerivative { axis: 0 },
            },
            &[&mollifier],
        )?;
        let cr = verify_test_object(&mut comm, &vc)?;
        if !cr.passed {
            return Err(Error::Config("commutator net failed the 0-test-object axioms".into()));
        }
        let families = (
            vec![Arc::new(mollifier)],
            vec![Arc::new(zero), Arc::new(comm)],
        );
        *self.families.borrow_mut() = Some(families.clone());
        Ok(families)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig> {
        let mut vc = VerifyConfig::standard(
            &self.grid,
            self.scale.clone(),
            self.windows.clone(),
            self.seminorms.clone(),
        )?;
        vc.min_decay_slope = self.to2_slope;
        vc.exec = self.exec;
        Ok(vc)
    }

    pub fn regime_config(&self) -> Result<RegimeConfig> {
        let (test_nets, zero_nets) = self.certified_families()?;
        Ok(RegimeConfig {
            scale: self.scale.clone(),
            test_nets,
            zero_nets,
            windows: self.windows.clone(),
            seminorms: self.seminorms.clone(),
            caps: self.caps,
            seed: self.seed,
            exec: self.exec,
        })
    }

    pub fn parse_expr(&self, block: &ExprBlock) -> Result<Arc<GFExpr>> {
        match block {
            ExprBlock::Iota { atom } => Ok(GFExpr::iota(
                self.domain,
                probes::distribution_probe(&self.grid, atom)?,
            )),
            ExprBlock::Sigma { r#fn } => Ok(GFExpr::sigma(
                self.domain,
                probes::smooth_probe(&self.grid, r#fn)?,
            )),
            ExprBlock::Sum { terms } => {
                let mut parsed = Vec::with_capacity(terms.len());
                for t in terms {
                    parsed.push((
                        num_complex::Complex64::new(t.coeff, 0.0),
                        self.parse_expr(&t.expr)?,
                    ));
                }
                GFExpr::sum(parsed)
            }
            ExprBlock::Prod { args } => {
                if args.len() != 2 {
                    return Err(Error::Config("prod takes exactly two arguments".into()));
                }
                GFExpr::prod(&self.parse_expr(&args[0])?, &self.parse_expr(&args[1])?)
            }
            ExprBlock::Multilift { lift, args } => {
                let op = match lift.as_str() {
                    "product" => MultiLinear::Product,
                    other => {
                        if let Some(c) = other.strip_prefix("weighted:") {
                            MultiLinear::WeightedProduct {
                                omega: self.parse_coeff(c)?,
                            }
                        } else {
                            return Err(Error::Config(format!("unknown lift {other:?}")));
                        }
                    }
                };
                let mut parsed = Vec::with_capacity(args.len());
                for a in args {
                    parsed.push(self.parse_expr(a)?);
                }
                GFExpr::multilift(op, parsed)
            }
            ExprBlock::Hat { linop, arg } => {
                Ok(GFExpr::hat(self.parse_linop(linop)?, &self.parse_expr(arg)?))
            }
            ExprBlock::Push { map, arg } => {
                let (d, stretch) = self.parse_diffeo(map)?;
                Ok(GFExpr::pushforward(Arc::new(d), stretch, &self.parse_expr(arg)?))
            }
        }
    }

    pub fn parse_linop(&self, spec: &str) -> Result<LinOpSpec> {
        if spec == "id" {
            return Ok(LinOpSpec::Identity);
        }
        if let Some(axis) = spec.strip_prefix("partial:") {
            let axis: usize = axis
                .parse()
                .map_err(|_| Error::Config(format!("bad axis in {spec:?}")))?;
            return Ok(LinOpSpec::PartialDerivative { axis });
        }
        if let Some(c) = spec.strip_prefix("mult:") {
            return Ok(LinOpSpec::Multiplier {
                omega: self.parse_coeff(c)?,
            });
        }
        if let Some(rest) = spec.strip_prefix("first:") {
            let parts: Vec<&str> = rest.splitn(3, ':').collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!(
                    "first-order operator needs axis:a:b, got {spec:?}"
                )));
            }
            let axis: usize = parts[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad axis in {spec:?}")))?;
            return Ok(LinOpSpec::FirstOrder {
                axis,
                a: self.parse_coeff(parts[1])?,
                b: self.parse_coeff(parts[2])?,
            });
        }
        Err(Error::Config(format!("unknown operator {spec:?}")))
    }

    pub fn parse_coeff(&self, spec: &str) -> Result<SmoothCoeff> {
        match spec {
            "x" => return Ok(SmoothCoeff::Coord { axis: 0 }),
            "sin" => {
                return Ok(SmoothCoeff::Sin {
                    axis: 0,
                    freq: 1.0,
                    amp: 1.0,
                    phase: 0.0,
                })
            }
            "cos" => return Ok(SmoothCoeff::cos(0, 1.0, 1.0)),
            "bump" => return Ok(SmoothCoeff::Mask(self.standard_bump())),
            "one-minus-bump" => {
                return Ok(SmoothCoeff::MaskComplement(self.standard_bump()))
            }
            _ => {}
        }
        if let Some(v) = spec.strip_prefix("const:") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad constant {spec:?}")))?;
            return Ok(SmoothCoeff::Const(v));
        }
        Err(Error::Config(format!("unknown coefficient {spec:?}")))
    }

    pub fn standard_bump(&self) -> SmoothMask {
        let mut core = self.domain;
        let mut supp = self.domain;
        for a in 0..self.domain.dim {
            let len = self.domain.len(a);
            core.lo[a] += 0.3 * len;
            core.hi[a] -= 0.3 * len;
            supp.lo[a] += 0.15 * len;
            supp.hi[a] -= 0.15 * len;
        }
        SmoothMask::plateau(&core, &supp, self.params.psi_q)
    }

    pub fn parse_diffeo(&self, spec: &str) -> Result<(Diffeo, f64)> {
        let (d1, name) = if spec == "id" {
            (Diffeo1D::Identity, "id".to_string())
        } else if let Some(rest) = spec.strip_prefix("affine:") {
            let parts: Vec<&str> = rest.splitn(2, ':').collect();
            if parts.len() != 2 {
                return Err(Error::Config(format!("affine needs a:b, got {spec:?}")));
            }
            let a: f64 = parts[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad affine {spec:?}")))?;
            let b: f64 = parts[1]
                .parse()
                .map_err(|_| Error::Config(format!("bad affine {spec:?}")))?;
            (Diffeo1D::Affine { a, b }, spec.to_string())
        } else if let Some(amp) = spec.strip_prefix("sine:") {
            let amp: f64 = amp
                .parse()
                .map_err(|_| Error::Config(format!("bad amplitude {spec:?}")))?;
            (Diffeo1D::SinePerturb { amp }, spec.to_string())
        } else if let Some(amp) = spec.strip_prefix("tanh:") {
            let amp: f64 = amp
                .parse()
                .map_err(|_| Error::Config(format!("bad amplitude {spec:?}")))?;
            (Diffeo1D::TanhStretch { amp }, spec.to_string())
        } else {
            return Err(Error::Config(format!("unknown map {spec:?}")));
        };
        let d = Diffeo::new_1d(d1, name);
        // stretch bound from a grid sample of the forward derivative
        let mut lip = 0.0f64;
        for i in 0..256 {
            let x = self.grid.comp.lo[0] + self.grid.comp.len(0) * i as f64 / 255.0;
            let d1v = d.axes[0].d_forward(x).abs();
            lip = lip.max(d1v).max(1.0 / d1v.max(1e-9));
        }
        Ok((d, lip * 1.05))
    }

    pub fn scale_by_name(&self, pair: &str) -> Result<ScalePair> {
        match pair {
            "poly" => make_polynomial_pair(&self.eps),
            _ => {
                if let Some(rest) = pair.strip_prefix("ultra-beurling:") {
                    let kind = colombeau_core::weights::parse_weight_spec(rest)?;
                    let (w, _) = build_weight_sequence(kind, 4096)?;
                    make_ultra_pair(w, UltraFlavor::Beurling, &rfamily(), &self.eps)
                } else if let Some(rest) = pair.strip_prefix("ultra-roumieu:") {
                    let kind = colombeau_core::weights::parse_weight_spec(rest)?;
                    let (w, _) = build_weight_sequence(kind, 4096)?;
                    make_ultra_pair(w, UltraFlavor::Roumieu, &rfamily(), &self.eps)
                } else {
                    Err(Error::Config(format!("unknown scale pair {pair:?}")))
                }
            }
        }
    }
}

fn parse_rnet(block: &RNetBlock, eps: &[f64]) -> Result<Arc<RNet>> {
    match block.kind.as_str() {
        "power" => {
            if block.beta <= 0.0 || block.beta >= 1.0 {
                return Err(Error::Config("radius exponent must be in (0, 1)".into()));
            }
            Ok(RNet::power(block.beta, block.coeff))
        }
        "paired" => {
            let (m, _) = build_weight_sequence(WeightKind::Gevrey { s: 2.0 }, 4096)?;
            let (n, _) = build_weight_sequence(WeightKind::Gevrey { s: 1.5 }, 4096)?;
            Ok(r_net(m, n, RNetConfig::default(), eps)?.0)
        }
        other => Err(Error::Config(format!("unknown radius net {other:?}"))),
    }
}

