//! Weight sequences, their defining conditions, associated functions and
//! the radius nets used by the mollifier construction.
//!
//! All sequence arithmetic is done in the log domain: `(p!)^2` overflows a
//! double around p = 85 while the maximizer searches here routinely visit
//! p in the thousands.

use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

/// How a weight sequence is generated.
#[derive(Debug, Clone)]
pub enum WeightKind {
    /// M_p = (p!)^s with s >= 1.
    Gevrey { s: f64 },
    /// Explicit table of log M_p values, starting at p = 0.
    Table { log_m: Vec<f64> },
}

/// Witness constants for condition (M.2): M_{p+q} <= A H^{p+q} M_p M_q.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct M2Witness {
    pub a: f64,
    pub h: f64,
    /// true when the witness comes from a closed-form bound rather than a grid search
    pub analytic: bool,
}

/// Outcome of a single condition check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub detail: String,
}

/// Verdict on (M.3)': sum of M_{p-1}/M_p.
#[derive(Debug, Clone, serde::Serialize)]
pub struct M3PrimeReport {
    pub converges: bool,
    /// "ratio" for closed-form classification, "partial-sum heuristic" for tables
    pub mode: String,
    /// partial sums sampled at decade indices
    pub partial_sums: Vec<(usize, f64)>,
}

/// Per-condition report produced by [`build_weight_sequence`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConditionReport {
    pub m1: CheckOutcome,
    pub m2: CheckOutcome,
    pub m2_witness: Option<M2Witness>,
    pub m3_prime: M3PrimeReport,
}

/// A positive weight sequence M_p with M_0 = 1, kept in log domain.
///
/// Gevrey tables extend themselves on demand; explicit tables are fixed and
/// report [`Error::ExtensionLimit`] when a maximizer runs off the end.
pub struct WeightSequence {
    kind: WeightKind,
    /// cumulative log M_p cache; for Gevrey this holds s * log(p!)
    table: RwLock<Vec<f64>>,
    hard_cap: usize,
    m2: Option<M2Witness>,
    m1_certified: bool,
}

impl std::fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightSequence")
            .field("kind", &self.kind)
            .field("hard_cap", &self.hard_cap)
            .field("m2", &self.m2)
            .finish()
    }
}

/// Gevrey tables are materialized up to this index; beyond it log(p!) comes
/// from the Stirling series, whose absolute error is far below 1e-20 there.
const GEVREY_TABLE_CAP: usize = 1 << 20;
const GEVREY_HARD_CAP: usize = 1 << 52;

fn stirling_log_factorial(p: usize) -> f64 {
    let z = (p + 1) as f64;
    let log_2pi = (2.0 * std::f64::consts::PI).ln();
    (z - 0.5) * z.ln() - z + 0.5 * log_2pi + 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3))
        + 1.0 / (1260.0 * z.powi(5))
}

impl WeightSequence {
    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn m2_constants(&self) -> Option<M2Witness> {
        self.m2
    }

    pub fn m1_certified(&self) -> bool {
        self.m1_certified
    }

    pub fn p_max(&self) -> usize {
        self.hard_cap
    }

    /// log M_p, extending the cache for Gevrey kinds.
    pub fn log_m(&self, p: usize) -> Result<f64> {
        if p > self.hard_cap {
            return Err(Error::ExtensionLimit {
                p_max: self.hard_cap,
                t: f64::NAN,
            });
        }
        {
            let table = self.table.read().unwrap();
            if p < table.len() {
                return Ok(table[p]);
            }
        }
        match &self.kind {
            WeightKind::Table { .. } => Err(Error::ExtensionLimit {
                p_max: self.hard_cap,
                t: f64::NAN,
            }),
            WeightKind::Gevrey { s } => {
                if p > GEVREY_TABLE_CAP {
                    return Ok(s * stirling_log_factorial(p));
                }
                let mut table = self.table.write().unwrap();
                let target = (p + 1).next_power_of_two().min(GEVREY_TABLE_CAP + 1);
                if table.len() < target {
                    let mut logfact = table[table.len() - 1] / s;
                    for q in table.len()..target {
                        logfact += (q as f64).ln();
                        table.push(s * logfact);
                    }
                }
                Ok(table[p])
            }
        }
    }

    /// log of the ratio M_{p}/M_{p-1}, the increment of log M.
    fn log_ratio(&self, p: usize) -> Result<f64> {
        Ok(self.log_m(p)? - self.log_m(p - 1)?)
    }
}

fn check_m1(w: &WeightSequence, p_check: usize) -> CheckOutcome {
    let mut prev = match w.log_ratio(1) {
        Ok(v) => v,
        Err(e) => {
            return CheckOutcome {
                passed: false,
                detail: format!("cannot evaluate: {e}"),
            }
        }
    };
    for p in 2..=p_check {
        let cur = match w.log_ratio(p) {
            Ok(v) => v,
            Err(_) => break,
        };
        // log convexity: ratios must be nondecreasing
        if cur < prev - 1e-12 * prev.abs().max(1.0) {
            return CheckOutcome {
                passed: false,
                detail: format!("ratio decreases at p = {p}"),
            };
        }
        prev = cur;
    }
    CheckOutcome {
        passed: true,
        detail: format!("log-convex on 1..={p_check}"),
    }
}

fn check_m2(w: &WeightSequence, p_check: usize) -> (CheckOutcome, Option<M2Witness>) {
    if let WeightKind::Gevrey { s } = w.kind {
        // (p+q)! <= 2^{p+q} p! q!  so  M_{p+q} <= (2^s)^{p+q} M_p M_q
        let witness = M2Witness {
            a: 1.0,
            h: (2.0f64).powf(s),
            analytic: true,
        };
        return (
            CheckOutcome {
                passed: true,
                detail: format!("binomial bound, (A, H) = (1, {})", witness.h),
            },
            Some(witness),
        );
    }
    // grid search over H for tables
    let half = p_check / 2;
    if half < 2 {
        return (
            CheckOutcome {
                passed: false,
                detail: "table too short for (M.2) search".into(),
            },
            None,
        );
    }
    let stride = (half / 64).max(1);
    let samples: Vec<usize> = (0..=half).step_by(stride).collect();
    for k in 0..=20 {
        let log_h = 0.5 * std::f64::consts::LN_2 * k as f64;
        let mut max_low = f64::NEG_INFINITY;
        let mut max_high = f64::NEG_INFINITY;
        let mut feasible = true;
        'outer: for &p in &samples {
            for &q in &samples {
                if p + q > p_check {
                    continue;
                }
                let g = match (w.log_m(p + q), w.log_m(p), w.log_m(q)) {
                    (Ok(a), Ok(b), Ok(c)) => a - b - c - (p + q) as f64 * log_h,
                    _ => {
                        feasible = false;
                        break 'outer;
                    }
                };
                if p + q <= p_check / 2 {
                    max_low = max_low.max(g);
                } else {
                    max_high = max_high.max(g);
                }
            }
        }
        if feasible && max_high <= max_low + 1e-9 {
            let a = max_low.max(max_high).exp().max(1.0);
            let witness = M2Witness {
                a,
                h: log_h.exp().max(1.0),
                analytic: false,
            };
            return (
                CheckOutcome {
                    passed: true,
                    detail: format!("grid witness (A, H) = ({:.6}, {:.6})", witness.a, witness.h),
                },
                Some(witness),
            );
        }
    }
    (
        CheckOutcome {
            passed: false,
            detail: "no H <= 2^10 bounds the sampled ratios".into(),
        },
        None,
    )
}

fn check_m3_prime(w: &WeightSequence, p_max: usize) -> M3PrimeReport {
    match w.kind {
        WeightKind::Gevrey { s } => {
            // ratio M_{p-1}/M_p = p^{-s}: p-series, converges iff s > 1
            let converges = s > 1.0;
            let sum_to = 1_000_000usize;
            let mut partial_sums = Vec::new();
            let mut sum = 0.0;
            let mut next_decade = 10usize;
            for p in 1..=sum_to {
                sum += (p as f64).powf(-s);
                if p == next_decade || p == sum_to {
                    partial_sums.push((p, sum));
                    next_decade = next_decade.saturating_mul(10);
                }
            }
            M3PrimeReport {
                converges,
                mode: "ratio".into(),
                partial_sums,
            }
        }
        WeightKind::Table { .. } => {
            let mut partial_sums = Vec::new();
            let mut sum = 0.0;
            let mut sums_at = vec![0.0f64; 0];
            let mut idx = Vec::new();
            let mut next_decade = 10usize;
            for p in 1..=p_max {
                let ratio = match (w.log_m(p - 1), w.log_m(p)) {
                    (Ok(a), Ok(b)) => (a - b).exp(),
                    _ => break,
                };
                sum += ratio;
                if p == next_decade || p == p_max {
                    partial_sums.push((p, sum));
                    sums_at.push(sum);
                    idx.push(p);
                    next_decade = next_decade.saturating_mul(10);
                }
            }
            // growing by more than 1e-6 over the last decade of p means "fail (heuristic)"
            let last_decade_growth = if sums_at.len() >= 2 {
                sums_at[sums_at.len() - 1] - sums_at[sums_at.len() - 2]
            } else {
                f64::INFINITY
            };
            M3PrimeReport {
                converges: last_decade_growth <= 1e-6,
                mode: "partial-sum heuristic".into(),
                partial_sums,
            }
        }
    }
}

/// Build a weight sequence and check (M.1), (M.2), (M.3)'.
pub fn build_weight_sequence(
    kind: WeightKind,
    p_max: usize,
) -> Result<(Arc<WeightSequence>, ConditionReport)> {
    match &kind {
        WeightKind::Gevrey { s } => {
            if !s.is_finite() || *s < 1.0 {
                return Err(Error::InvalidWeight(format!(
                    "Gevrey order must satisfy s >= 1, got {s}"
                )));
            }
        }
        WeightKind::Table { log_m } => {
            if log_m.is_empty() || log_m[0] != 0.0 {
                return Err(Error::InvalidWeight("table must start with log M_0 = 0".into()));
            }
            if log_m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidWeight("non-finite table entry".into()));
            }
        }
    }
    let hard_cap = match &kind {
        WeightKind::Gevrey { .. } => GEVREY_HARD_CAP.max(p_max),
        WeightKind::Table { log_m } => log_m.len() - 1,
    };
    let table = match &kind {
        WeightKind::Table { log_m } => log_m.clone(),
        WeightKind::Gevrey { .. } => vec![0.0],
    };
    let mut w = WeightSequence {
        kind,
        table: RwLock::new(table),
        hard_cap,
        m2: None,
        m1_certified: false,
    };
    let p_check = p_max.min(hard_cap).max(2);
    let m1 = check_m1(&w, p_check.min(4096));
    let (m2, m2_witness) = check_m2(&w, p_check.min(4096));
    let m3_prime = check_m3_prime(&w, p_check);
    w.m2 = m2_witness;
    w.m1_certified = m1.passed;
    let report = ConditionReport {
        m1,
        m2,
        m2_witness,
        m3_prime,
    };
    Ok((Arc::new(w), report))
}

/// Parse a config-facing weight spec: "gevrey:2", "gevrey:1.5" or "table:<path>"
/// (one log M_p per line, ASCII decimal).
pub fn parse_weight_spec(spec: &str) -> Result<WeightKind> {
    if let Some(s) = spec.strip_prefix("gevrey:") {
        let s: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("bad Gevrey order in {spec:?}")))?;
        Ok(WeightKind::Gevrey { s })
    } else if let Some(path) = spec.strip_prefix("table:") {
        let text = std::fs::read_to_string(path)?;
        let mut log_m = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Config(format!("bad table entry on line {}", i + 1)))?;
            log_m.push(v);
        }
        Ok(WeightKind::Table { log_m })
    } else {
        Err(Error::Config(format!("unknown weight spec {spec:?}")))
    }
}

/// A sequence r_j from the family used for Roumieu seminorms and scales:
/// positive, r_0 = 1, increasing to infinity.
#[derive(Debug)]
pub enum RSequence {
    /// r_j = (1 + j)^theta
    Power { theta: f64 },
    /// pointwise minimum of two members; still increases to infinity
    Min(Arc<RSequence>, Arc<RSequence>),
    /// r'_j = max(1, base_{ceil(j/2)} / h); witness shape for product bounds
    HalvedScaled { base: Arc<RSequence>, h: f64 },
}

impl RSequence {
    pub fn power(theta: f64) -> Arc<RSequence> {
        Arc::new(RSequence::Power { theta })
    }

    pub fn value(&self, j: usize) -> f64 {
        match self {
            RSequence::Power { theta } => ((1 + j) as f64).powf(*theta),
            RSequence::Min(a, b) => a.value(j).min(b.value(j)),
            RSequence::HalvedScaled { base, h } => {
                if j == 0 {
                    1.0
                } else {
                    (base.value(j.div_ceil(2)) / h).max(1.0)
                }
            }
        }
    }

    /// sum_{j=0}^{p} ln r_j
    pub fn cum_log(&self, p: usize) -> f64 {
        // O(p); callers cache through AssociatedFunction's search locality
        let mut acc = 0.0;
        for j in 0..=p {
            acc += self.value(j).ln();
        }
        acc
    }

    pub fn describe(&self) -> String {
        match self {
            RSequence::Power { theta } => format!("(1+j)^{theta}"),
            RSequence::Min(a, b) => format!("min({}, {})", a.describe(), b.describe()),
            RSequence::HalvedScaled { base, h } => {
                format!("max(1, [{}]_ceil(j/2)/{h})", base.describe())
            }
        }
    }

    /// Sampled membership check: r_0 = 1, nondecreasing on 0..=j_check and
    /// exceeding `bound` at j_big.
    pub fn check_membership(&self, j_check: usize, j_big: usize, bound: f64) -> Result<()> {
        if (self.value(0) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidScale("r_0 != 1".into()));
        }
        for j in 1..=j_check {
            if self.value(j) < self.value(j - 1) - 1e-12 {
                return Err(Error::InvalidScale(format!("r_j decreases at j = {j}")));
            }
        }
        if self.value(j_big) <= bound {
            return Err(Error::InvalidScale(format!(
                "r_{{{j_big}}} = {} does not exceed {bound}",
                self.value(j_big)
            )));
        }
        Ok(())
    }
}

/// Associated function M(t) = sup_p [p log t - log M_p], optionally for the
/// modulated sequence M_p * prod_{j<=p} r_j.
pub struct AssociatedFunction {
    weights: Arc<WeightSequence>,
    modulation: Option<Arc<RSequence>>,
    /// cumulative sum of ln r_j aligned with the weight table
    mod_cum: RwLock<Vec<f64>>,
}

impl std::fmt::Debug for AssociatedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AssociatedFunction")
            .field("weights", &self.weights)
            .field("modulated", &self.modulation.is_some())
            .finish()
    }
}

impl AssociatedFunction {
    pub fn new(weights: Arc<WeightSequence>, modulation: Option<Arc<RSequence>>) -> Arc<Self> {
        Arc::new(AssociatedFunction {
            weights,
            modulation,
            mod_cum: RwLock::new(vec![0.0]),
        })
    }

    pub fn weights(&self) -> &Arc<WeightSequence> {
        &self.weights
    }

    /// log of the effective weight: log M_p + sum_{j<=p} ln r_j
    pub fn log_weight(&self, p: usize) -> Result<f64> {
        let base = self.weights.log_m(p)?;
        match &self.modulation {
            None => Ok(base),
            Some(r) => {
                {
                    let cum = self.mod_cum.read().unwrap();
                    if p < cum.len() {
                        return Ok(base + cum[p]);
                    }
                }
                let mut cum = self.mod_cum.write().unwrap();
                let mut acc = cum[cum.len() - 1];
                for j in cum.len()..=p {
                    acc += r.value(j).ln();
                    cum.push(acc);
                }
                Ok(base + cum[p])
            }
        }
    }

    fn term(&self, p: usize, log_t: f64) -> Result<f64> {
        Ok(p as f64 * log_t - self.log_weight(p)?)
    }

    /// increment term(p+1) - term(p); nonincreasing in p under (M.1)
    fn increment(&self, p: usize, log_t: f64) -> Result<f64> {
        Ok(log_t - (self.log_weight(p + 1)? - self.log_weight(p)?))
    }

    /// M(t) with the index of the maximizing p.
    pub fn eval_with_argmax(&self, t: f64) -> Result<(f64, usize)> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidWeight(format!("associated function needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok((0.0, 0));
        }
        let log_t = t.ln();
        if self.weights.m1_certified() {
            // increments are nonincreasing: gallop to the first nonpositive one
            if self.increment(0, log_t)? <= 0.0 {
                return Ok((self.term(0, log_t)?.max(0.0), 0));
            }
            let mut lo = 0usize;
            let mut hi = 1usize;
            loop {
                match self.increment(hi, log_t) {
                    Ok(v) if v <= 0.0 => break,
                    Ok(_) => {
                        lo = hi;
                        if hi >= self.weights.p_max() {
                            return Err(Error::ExtensionLimit {
                                p_max: self.weights.p_max(),
                                t,
                            });
                        }
                        hi = (hi * 2).min(self.weights.p_max());
                    }
                    Err(Error::ExtensionLimit { .. }) => {
                        return Err(Error::ExtensionLimit {
                            p_max: self.weights.p_max(),
                            t,
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
            // first index with increment <= 0 lies in (lo, hi]
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.increment(mid, log_t)? <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let p_star = hi;
            Ok((self.term(p_star, log_t)?.max(0.0), p_star))
        } else {
            // no convexity certificate: full scan over the materialized range
            let mut best = 0.0f64;
            let mut arg = 0usize;
            let mut p = 0usize;
            loop {
                match self.term(p, log_t) {
                    Ok(v) => {
                        if v > best {
                            best = v;
                            arg = p;
                        }
                    }
                    Err(_) => break,
                }
                p += 1;
                if p > self.weights.p_max() {
                    break;
                }
            }
            if arg + 1 > self.weights.p_max() && self.weights.p_max() > 0 {
                return Err(Error::ExtensionLimit {
                    p_max: self.weights.p_max(),
                    t,
                });
            }
            Ok((best, arg))
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.eval_with_argmax(t)?.0)
    }

    /// Radial extension M(|x|).
    pub fn eval_radial(&self, x: &[f64]) -> Result<f64> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.eval(norm)
    }
}

/// Spec for a radius net epsilon -> r_epsilon.
#[derive(Debug, Clone)]
pub enum RNetSpec {
    /// r_eps = coeff * eps^beta
    Power { beta: f64, coeff: f64 },
    /// the net obtained from a pair of weight sequences (N preceding M)
    Paired {
        m: Arc<WeightSequence>,
        n: Arc<WeightSequence>,
    },
}

/// Tuning for the paired construction.
#[derive(Debug, Clone)]
pub struct RNetConfig {
    /// upper end of the sup grid (extended adaptively for tiny eps)
    pub t_max: f64,
    /// points in the log-spaced sup grid
    pub grid_points: usize,
}

impl Default for RNetConfig {
    fn default() -> Self {
        RNetConfig {
            t_max: 1e8,
            grid_points: 400,
        }
    }
}

/// Radius net r_eps, decreasing to 0 as eps -> 0, feeding the spatial cutoff
/// of the mollifier.
pub struct RNet {
    spec: RNetSpec,
    cfg: RNetConfig,
    assoc_m: Option<Arc<AssociatedFunction>>,
    assoc_n: Option<Arc<AssociatedFunction>>,
    cache: RwLock<std::collections::BTreeMap<u64, f64>>,
}

impl std::fmt::Debug for RNet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RNet").field("spec", &self.spec).finish()
    }
}

/// Monotone inverse of an associated function: smallest u with N(u) >= y.
fn invert_assoc(n: &AssociatedFunction, y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Ok(1e-12);
    }
    let mut lo = 1e-12;
    let mut hi = 2.0;
    let mut iter = 0;
    while n.eval(hi)? < y {
        lo = hi;
        hi *= 2.0;
        iter += 1;
        if iter > 400 {
            return Err(Error::InversionBracket { target: y });
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if n.eval(mid)? >= y {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-14 {
            break;
        }
    }
    Ok(hi)
}

impl RNet {
    pub fn power(beta: f64, coeff: f64) -> Arc<RNet> {
        Arc::new(RNet {
            spec: RNetSpec::Power { beta, coeff },
            cfg: RNetConfig::default(),
            assoc_m: None,
            assoc_n: None,
            cache: RwLock::new(Default::default()),
        })
    }

    /// rho(t) = N^{-1}(M(t)); only defined for paired nets.
    pub fn rho(&self, t: f64) -> Result<f64> {
        let (m, n) = match (&self.assoc_m, &self.assoc_n) {
            (Some(m), Some(n)) => (m, n),
            _ => return Err(Error::InvalidScale("rho only exists for paired nets".into())),
        };
        invert_assoc(n, m.eval(t)?)
    }

    /// r_eps, cached per eps.
    pub fn r(&self, eps: f64) -> Result<f64> {
        let key = eps.to_bits();
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let value = match &self.spec {
            RNetSpec::Power { beta, coeff } => coeff * eps.powf(*beta),
            RNetSpec::Paired { .. } => {
                let t_lo = eps.powf(-0.5);
                let t_hi = self.cfg.t_max.max(t_lo * 1e4);
                let k = self.cfg.grid_points;
                let mut sup = 0.0f64;
                for i in 0..k {
                    let t = t_lo * (t_hi / t_lo).powf(i as f64 / (k - 1) as f64);
                    sup = sup.max(self.rho(t)? / t);
                }
                sup
            }
        };
        self.cache.write().unwrap().insert(key, value);
        Ok(value)
    }

    pub fn is_paired(&self) -> bool {
        matches!(self.spec, RNetSpec::Paired { .. })
    }

    pub fn assoc_m(&self) -> Option<&Arc<AssociatedFunction>> {
        self.assoc_m.as_ref()
    }

    pub fn assoc_n(&self) -> Option<&Arc<AssociatedFunction>> {
        self.assoc_n.as_ref()
    }
}

/// Verification data for the paired net inequality
/// M(t) <= N(r_eps t) + M(lambda/eps).
#[derive(Debug, Clone, serde::Serialize)]
pub struct RNetReport {
    /// (eps, r_eps) on the sampled grid
    pub r_values: Vec<(f64, f64)>,
    pub monotone: bool,
    /// minimum slack of the defining inequality over the (t, eps) sample grid
    pub min_slack: f64,
}

/// Check that the sequence N precedes M in the sampled sense: the associated
/// function of N eventually dominates every shifted copy of M's, so that
/// rho(t)/t decays on the grid.
fn check_precedes(m: &AssociatedFunction, n: &AssociatedFunction) -> Result<()> {
    let grid: Vec<f64> = (0..40).map(|i| 10f64.powf(1.0 + 7.0 * i as f64 / 39.0)).collect();
    let mut last_gap = f64::NEG_INFINITY;
    let mut grew = false;
    for &t in &grid {
        let gap = n.eval(t)? - m.eval(t)?;
        if gap > last_gap {
            grew = true;
        }
        last_gap = gap;
    }
    let first = n.eval(grid[0])? - m.eval(grid[0])?;
    if !grew || last_gap <= first.max(0.0) {
        return Err(Error::InvalidScale(
            "second sequence does not precede the first (associated-function gap not growing)".into(),
        ));
    }
    Ok(())
}

/// Build the paired radius net for weight sequences M, N with N preceding M,
/// and verify the defining inequality on a sample grid.
pub fn r_net(
    m: Arc<WeightSequence>,
    n: Arc<WeightSequence>,
    cfg: RNetConfig,
    eps_grid: &[f64],
) -> Result<(Arc<RNet>, RNetReport)> {
    let assoc_m = AssociatedFunction::new(m.clone(), None);
    let assoc_n = AssociatedFunction::new(n.clone(), None);
    check_precedes(&assoc_m, &assoc_n)?;
    let net = Arc::new(RNet {
        spec: RNetSpec::Paired { m, n },
        cfg,
        assoc_m: Some(assoc_m.clone()),
        assoc_n: Some(assoc_n.clone()),
        cache: RwLock::new(Default::default()),
    });
    let mut r_values = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        r_values.push((eps, net.r(eps)?));
    }
    let mut monotone = true;
    for w in r_values.windows(2) {
        // grids run from large eps to small: r must not increase
        if w[0].0 > w[1].0 && w[1].1 > w[0].1 + 1e-12 {
            monotone = false;
        }
    }
    let mut min_slack = f64::INFINITY;
    let lambda = 1.0;
    for &(eps, r) in &r_values {
        for i in 0..24 {
            let t = 10f64.powf(-1.0 + 8.0 * i as f64 / 23.0);
            let slack = assoc_n.eval(r * t)? + assoc_m.eval(lambda / eps)? - assoc_m.eval(t)?;
            min_slack = min_slack.min(slack);
        }
    }
    let report = RNetReport {
        r_values,
        monotone,
        min_slack,
    };
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gevrey(s: f64) -> Arc<WeightSequence> {
        build_weight_sequence(WeightKind::Gevrey { s }, 4096).unwrap().0
    }

    /// independent oracle: exhaustive max over p <= cap
    fn brute_force_assoc(af: &AssociatedFunction, t: f64, cap: usize) -> f64 {
        let log_t = t.ln();
        let mut best = 0.0f64;
        for p in 0..=cap {
            let term = p as f64 * log_t - af.log_weight(p).unwrap();
            best = best.max(term);
        }
        best
    }

    #[test]
    fn gevrey2_condition_report() {
        let (_, report) = build_weight_sequence(WeightKind::Gevrey { s: 2.0 }, 4096).unwrap();
        assert!(report.m1.passed);
        assert!(report.m2.passed);
        let w = report.m2_witness.unwrap();
        assert_eq!(w.a, 1.0);
        assert_eq!(w.h, 4.0);
        assert!(report.m3_prime.converges);
        // partial sum of p^{-2} at p = 10^6, cross-checked against the p-series limit
        let (_, s6) = *report.m3_prime.partial_sums.last().unwrap();
        let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!((s6 - 1.6449).abs() < 1e-3, "s6 = {s6}");
        assert!((zeta2 - s6).abs() < 2e-6, "tail should be ~1/p_max");
    }

    #[test]
    fn gevrey1_fails_m3_prime() {
        let (_, report) = build_weight_sequence(WeightKind::Gevrey { s: 1.0 }, 4096).unwrap();
        assert!(report.m1.passed);
        assert!(!report.m3_prime.converges);
    }

    #[test]
    fn constant_table_m1_equality_m3_fail() {
        let kind = WeightKind::Table { log_m: vec![0.0; 2000] };
        let (_, report) = build_weight_sequence(kind, 1999).unwrap();
        assert!(report.m1.passed);
        assert!(!report.m3_prime.converges);
        assert_eq!(report.m3_prime.mode, "partial-sum heuristic");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_weight_sequence(WeightKind::Gevrey { s: 0.5 }, 10).is_err());
        assert!(build_weight_sequence(WeightKind::Table { log_m: vec![1.0, 0.0] }, 1).is_err());
    }

    #[test]
    fn associated_function_known_values() {
        let af1 = AssociatedFunction::new(gevrey(1.0), None);
        let af2 = AssociatedFunction::new(gevrey(2.0), None);
        // t = 1: every term is <= 0 and p = 0 attains 0
        assert_eq!(af1.eval(1.0).unwrap(), 0.0);
        assert_eq!(af2.eval(1.0).unwrap(), 0.0);
        // Gevrey 1 at t = e: increments 1 - ln(p+1) change sign at p = 2
        let e = std::f64::consts::E;
        let expect = 2.0 - std::f64::consts::LN_2;
        assert!((af1.eval(e).unwrap() - expect).abs() < 1e-12);
        assert_eq!(af1.eval_with_argmax(e).unwrap().1, 2);
        // Gevrey 2 at t = e: maximizer p = 1, value 1
        assert!((af2.eval(e).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(af2.eval_with_argmax(e).unwrap().1, 1);
    }

    #[test]
    fn associated_function_matches_brute_force() {
        for s in [1.0, 1.5, 2.0, 3.0] {
            let af = AssociatedFunction::new(gevrey(s), None);
            for &t in &[1.0, std::f64::consts::E, 10.0, 1e3] {
                let fast = af.eval(t).unwrap();
                let slow = brute_force_assoc(&af, t, 10_000);
                assert!(
                    (fast - slow).abs() <= 1e-12,
                    "s={s} t={t}: {fast} vs {slow}"
                );
            }
        }
        // larger t where the maximizer is still interior to p <= 10^4
        for s in [1.5, 2.0, 3.0] {
            let af = AssociatedFunction::new(gevrey(s), None);
            for &t in &[1e4, 1e5, 1e6] {
                let fast = af.eval(t).unwrap();
                let slow = brute_force_assoc(&af, t, 10_000);
                assert!((fast - slow).abs() <= 1e-12, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn associated_function_monotone_and_logt_convex() {
        let af = AssociatedFunction::new(gevrey(2.0), None);
        let us: Vec<f64> = (0..60).map(|i| -1.0 + 14.0 * i as f64 / 59.0).collect();
        let vals: Vec<f64> = us.iter().map(|u| af.eval(u.exp()).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in vals.windows(3) {
            // convex in log t: second differences nonnegative
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9);
        }
    }

    #[test]
    fn gevrey_order_reverses_associated_functions() {
        let a = AssociatedFunction::new(gevrey(1.5), None);
        let b = AssociatedFunction::new(gevrey(2.0), None);
        for i in 0..30 {
            let t = 10f64.powf(0.2 + 5.0 * i as f64 / 29.0);
            assert!(a.eval(t).unwrap() >= b.eval(t).unwrap() - 1e-12);
        }
    }

    #[test]
    fn m2_equivalence_for_associated_function() {
        // 2 M(t) <= M(H t) + log A on a log grid
        let (w, report) = build_weight_sequence(WeightKind::Gevrey { s: 2.0 }, 4096).unwrap();
        let witness = report.m2_witness.unwrap();
        let af = AssociatedFunction::new(w, None);
        for i in 0..50 {
            let t = 10f64.powf(-1.0 + 7.0 * i as f64 / 49.0);
            let lhs = 2.0 * af.eval(t).unwrap();
            let rhs = af.eval(witness.h * t).unwrap() + witness.a.ln();
            assert!(lhs <= rhs + 1e-10 * rhs.abs().max(1.0), "t = {t}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn modulated_weight_matches_direct_sum() {
        let r = RSequence::power(0.5);
        let af = AssociatedFunction::new(gevrey(2.0), Some(r.clone()));
        let mut cum = 0.0;
        for p in 0..=50 {
            cum += r.value(p).ln();
            let direct = gevrey(2.0).log_m(p).unwrap() + cum;
            assert!((af.log_weight(p).unwrap() - direct).abs() < 1e-10);
        }
        // modulated associated function still matches brute force
        let t = 37.0;
        let fast = af.eval(t).unwrap();
        let slow = brute_force_assoc(&af, t, 10_000);
        assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn r_sequence_membership() {
        for theta in [0.25, 0.5, 1.0] {
            RSequence::power(theta).check_membership(512, 1 << 20, 30.0).unwrap();
        }
        let halved = Arc::new(RSequence::HalvedScaled {
            base: RSequence::power(1.0),
            h: 4.0,
        });
        halved.check_membership(512, 1 << 24, 30.0).unwrap();
    }

    #[test]
    fn paired_r_net_monotone_with_nonnegative_slack() {
        let eps: Vec<f64> = (2..=16).map(|k| 2f64.powi(-k)).collect();
        let (net, report) = r_net(gevrey(2.0), gevrey(1.5), RNetConfig::default(), &eps).unwrap();
        assert!(report.monotone);
        assert!(report.min_slack >= 0.0, "min slack {}", report.min_slack);
        // decreasing towards zero: far down the grid the radius is tiny
        let r_small = net.r(2f64.powi(-64)).unwrap();
        assert!(r_small < 1e-2, "r at 2^-64 is {r_small}");
        let r_big = net.r(0.25).unwrap();
        assert!(r_small < 0.5 * r_big);
    }

    #[test]
    fn r_net_rejects_reversed_pair() {
        let eps = [0.25, 0.125];
        assert!(r_net(gevrey(1.5), gevrey(2.0), RNetConfig::default(), &eps).is_err());
    }

    #[test]
    fn extension_limit_is_reported() {
        let kind = WeightKind::Table {
            log_m: (0..32).map(|p| p as f64 * 0.3).collect(),
        };
        let (w, _) = build_weight_sequence(kind, 31).unwrap();
        let af = AssociatedFunction::new(w, None);
        // huge t drives the maximizer past the table end
        match af.eval(1e30) {
            Err(Error::ExtensionLimit { p_max, .. }) => assert_eq!(p_max, 31),
            other => panic!("expected extension limit, got {other:?}"),
        }
    }
}
