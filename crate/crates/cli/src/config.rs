//! Scenario configuration schema: one structured JSON document describing
//! the regime, the domain, and the named checks to run.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// short tag naming the mathematical claim this scenario exercises
    #[serde(default)]
    pub reference: String,
    /// human-readable summary of the verdicts the tasks are expected to give
    #[serde(default)]
    pub expected: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub domain: DomainBlock,
    pub regime: RegimeBlock,
    #[serde(default)]
    pub windows: Vec<WindowBlock>,
    #[serde(default = "default_seminorm_orders")]
    pub seminorm_orders: Vec<usize>,
    #[serde(default)]
    pub caps: CapsBlock,
    pub tasks: Vec<TaskBlock>,
}

fn default_seed() -> u64 {
    1
}

fn default_seminorm_orders() -> Vec<usize> {
    vec![0, 1]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainBlock {
    /// per-axis bounds of the open box
    pub r#box: Vec<[f64; 2]>,
    pub n: usize,
    /// dyadic eps grid 2^-a .. 2^-b
    pub eps_pow2: [u32; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeBlock {
    /// "distribution" | "gevrey-beurling" | "gevrey-roumieu"
    pub kind: String,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_s_chi")]
    pub s_chi: f64,
    /// radius net: {"kind": "power", "beta": .., "coeff": ..} or {"kind": "paired"}
    #[serde(default)]
    pub rnet: Option<RNetBlock>,
}

fn default_s() -> f64 {
    2.0
}

fn default_s_chi() -> f64 {
    1.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RNetBlock {
    pub kind: String,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub coeff: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowBlock {
    /// per-axis bounds of the compact probe box
    pub probe: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CapsBlock {
    pub l_max: usize,
    pub k_max: f64,
    pub derivative_cap: usize,
    /// decay cap for the convergence axiom of test objects in the
    /// polynomial regime; verdicts are valid up to this rate
    #[serde(default = "default_to2_slope")]
    pub to2_slope: f64,
}

fn default_to2_slope() -> f64 {
    8.0
}

impl Default for CapsBlock {
    fn default() -> Self {
        CapsBlock {
            l_max: 2,
            k_max: 8.0,
            derivative_cap: 2,
            to2_slope: 8.0,
        }
    }
}

/// Expression AST as nested tagged objects. Atom vocabulary:
/// "delta@x0", "ddelta@x0:m", "heaviside@x0", "density:<name>", "smooth:<name>".
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ExprBlock {
    Iota { atom: String },
    Sigma { r#fn: String },
    Sum { terms: Vec<TermBlock> },
    Prod { args: Vec<ExprBlock> },
    Multilift { lift: String, args: Vec<ExprBlock> },
    Hat { linop: String, arg: Box<ExprBlock> },
    Push { map: String, arg: Box<ExprBlock> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermBlock {
    pub coeff: f64,
    pub expr: ExprBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskBlock {
    /// classify an expression and compare with the expectation
    Classify {
        name: String,
        expr: ExprBlock,
        /// "moderate" | "negligible" | "not-negligible" | "moderate-not-negligible"
        expect: String,
        /// optional slope window [center, tolerance]
        #[serde(default)]
        slope: Option<[f64; 2]>,
    },
    /// equivalence of two expressions in the quotient
    Equivalent {
        name: String,
        lhs: ExprBlock,
        rhs: ExprBlock,
        expect: bool,
    },
    /// frequency-side mollifier bounds
    FourierBounds { name: String },
    /// admissibility of the scale pair named in the regime
    ScaleAdmissibility { name: String, pair: String },
    /// test-object axioms of the canonical mollifier net
    TestObjectAxioms { name: String },
    /// restriction/gluing layer checks over a cover
    SheafSuite {
        name: String,
        cover: Vec<[f64; 2]>,
    },
    /// classification invariance under a coordinate change
    DiffeoInvariance {
        name: String,
        map: String,
        exprs: Vec<ExprBlock>,
    },
    /// products of moderate and negligible samples stay negligible
    IdealCheck {
        name: String,
        moderate: Vec<ExprBlock>,
        negligible: Vec<ExprBlock>,
    },
}

impl TaskBlock {
    pub fn name(&self) -> &str {
        match self {
            TaskBlock::Classify { name, .. }
            | TaskBlock::Equivalent { name, .. }
            | TaskBlock::FourierBounds { name }
            | TaskBlock::ScaleAdmissibility { name, .. }
            | TaskBlock::TestObjectAxioms { name }
            | TaskBlock::SheafSuite { name, .. }
            | TaskBlock::DiffeoInvariance { name, .. }
            | TaskBlock::IdealCheck { name, .. } => name,
        }
    }
}
