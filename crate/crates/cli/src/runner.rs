//! Executes a scenario: build, tower, then the requested analyses.

use std::time::Instant;

use serde_json::{json, Map, Value};
use subfactor_core::field::Field;
use subfactor_core::inclusions::{
    basic_construction, build_group_inclusion, build_matrix_inclusion, build_tensor_inclusion, landau_check,
    pimsner_popa_basis, tl_overlap, vanishing_check, BasicConstruction, FourierModel, Inclusion, InclusionError,
    PermGroup, Perm, Quadrilateral, StarAlgebra, TraceSpec,
};
use subfactor_core::linalg::Matrix;
use subfactor_core::metrics::{
    angle, beta_quadratic, minimal_element, random_unitaries, singularity_report, singularity_scan, ss_constant,
    wahp_witness, Budget, MetricsError, SingularityReport,
};
use subfactor_core::scalars::{
    evaluate_quadratic, squarefree_decomposition, with_field, QuadraticNumber, DEFAULT_RADICAND,
};
use subfactor_core::tl::{tl_eval, tl_eval_at, DeltaValue};
use subfactor_core::Complex64;

use crate::report::{Check, Outcome, Section};
use crate::scenario::{Analysis, Kind, Literal, MatrixLiteral, Mode, SchemaError, Scenario};

/// WAHP sums are compared at this tolerance whatever `--tol` says.
pub const WAHP_TOL: f64 = 1e-8;
pub const VANISHING_TOL: f64 = 1e-12;
pub const ANGLE_TOL: f64 = 1e-9;

/// Command-line overrides.
#[derive(Clone, Debug)]
pub struct Options {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub tol: f64,
    pub precision: Option<u32>,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: None, restarts: None, tol: 1e-10, precision: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunError {
    Schema(SchemaError),
    Infeasible(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Schema(e) => write!(f, "schema error at {e}"),
            RunError::Infeasible(s) => write!(f, "infeasible: {s}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Infeasible(_) => 3,
        }
    }
}

#[derive(Clone, Debug)]
enum Fail {
    Sqrt(QuadraticNumber),
    Schema(SchemaError),
    Infeasible(String),
    Other(String),
}

impl From<InclusionError> for Fail {
    fn from(e: InclusionError) -> Self {
        match e {
            InclusionError::NeedsSqrt(q) => Fail::Sqrt(q),
            e if e.is_infeasible() => Fail::Infeasible(e.to_string()),
            e => Fail::Other(e.to_string()),
        }
    }
}

impl From<MetricsError> for Fail {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Inclusion(i) => i.into(),
            e => Fail::Other(e.to_string()),
        }
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    seed: u64,
    budget: Budget,
    tol: f64,
    bits: u32,
}

pub fn run_scenario(sc: &Scenario, opts: &Options) -> Result<Outcome, RunError> {
    let mut budget = Budget { restarts: sc.budget.restarts, iterations: sc.budget.iterations, samples: sc.budget.samples };
    if let Some(r) = opts.restarts {
        budget.restarts = r;
    }
    let ctx = Ctx {
        sc,
        seed: opts.seed.unwrap_or(sc.seed),
        budget,
        tol: opts.tol,
        bits: opts.precision.unwrap_or(sc.precision),
    };
    let lift = |f: Fail| match f {
        Fail::Schema(e) => Err(RunError::Schema(e)),
        Fail::Infeasible(s) => Err(RunError::Infeasible(s)),
        other => Ok(other),
    };

    let mut fallback = None;
    if sc.mode == Mode::Exact {
        let mut d = initial_radicand(sc);
        let mut tried = Vec::new();
        loop {
            tried.push(d);
            match with_field(d, || run_in::<QuadraticNumber>(&ctx)) {
                Ok(mut out) => {
                    out.mode = "exact".into();
                    out.field = Some(format!("Q(√{d})"));
                    return Ok(out);
                }
                Err(f) => match lift(f)? {
                    Fail::Sqrt(q) => match radicand_for(&q) {
                        Some(next) if !tried.contains(&next) => d = next,
                        _ => {
                            fallback = Some(format!("√({q}) is not in Q(√{d})"));
                            break;
                        }
                    },
                    Fail::Other(s) => {
                        fallback = Some(s);
                        break;
                    }
                    _ => unreachable!(),
                },
            }
        }
    }
    match run_in::<Complex64>(&ctx) {
        Ok(mut out) => {
            out.mode = "float".into();
            out.fallback = fallback;
            Ok(out)
        }
        Err(f) => match lift(f)? {
            Fail::Sqrt(q) => Err(RunError::Infeasible(format!("square root of {q} unavailable"))),
            Fail::Other(s) => Err(RunError::Infeasible(s)),
            _ => unreachable!(),
        },
    }
}

/// The scenario's `N ⊆ M` in the field `F`; exact callers must set the radicand.
pub fn build_inclusion<F: Field>(sc: &Scenario) -> Result<Inclusion<F>, RunError> {
    build::<F>(sc).map(|b| b.inc).map_err(|f| match f {
        Fail::Schema(e) => RunError::Schema(e),
        Fail::Infeasible(s) | Fail::Other(s) => RunError::Infeasible(s),
        Fail::Sqrt(q) => RunError::Infeasible(format!("square root of {q} unavailable")),
    })
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Schema(SchemaError::new("(file)", format!("{}: {e}", path.display()))))?;
    crate::scenario::parse_scenario(&text).map_err(RunError::Schema)
}

/// Squarefree part of a positive rational, if it is not a square.
fn radicand_for(q: &QuadraticNumber) -> Option<u64> {
    if !q.is_rational() {
        return None;
    }
    let r = q.rational_part();
    let n = r.numer() * r.denom();
    if n <= 0.into() {
        return None;
    }
    let (_, k) = squarefree_decomposition(&n);
    let k: u64 = k.try_into().ok()?;
    (k > 1).then_some(k)
}

/// The field that contains `√[M:N]`.
fn initial_radicand(sc: &Scenario) -> u64 {
    let index = build::<Complex64>(sc).ok().and_then(|b| b.inc.markov_data().ok()).and_then(|m| m.index_exact);
    match index {
        Some(q) if q.is_rational() => radicand_for(&q).unwrap_or(DEFAULT_RADICAND),
        Some(q) => q.radicand(),
        None => DEFAULT_RADICAND,
    }
}

struct Built<F: Field> {
    inc: Inclusion<F>,
    p: Option<StarAlgebra<F>>,
    q: Option<StarAlgebra<F>>,
    r: Option<StarAlgebra<F>>,
    /// `P ⊆ M` for quadrilaterals.
    upper: Option<Inclusion<F>>,
}

fn schema(path: impl Into<String>, e: impl ToString) -> Fail {
    Fail::Schema(SchemaError::new(path, e.to_string()))
}

fn literal<F: Field>(lit: &Literal, path: &str) -> Result<F, Fail> {
    let q: QuadraticNumber = lit.text().parse().map_err(|e| schema(path, e))?;
    if F::EXACT && !q.is_rational() && q.radicand() != subfactor_core::scalars::current_radicand() {
        return Err(Fail::Sqrt(QuadraticNumber::from_integer(q.radicand() as i64)));
    }
    if F::EXACT && q.is_rational() {
        return Ok(F::from_rational(q.rational_part()));
    }
    Ok(F::from_quadratic(&q))
}

fn matrix<F: Field>(lit: &MatrixLiteral, path: &str) -> Result<Matrix<F>, Fail> {
    let n = lit.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in lit.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            data.push(literal(x, &format!("{path}[{i}][{j}]"))?);
        }
    }
    Ok(Matrix::from_vec(n, n, data))
}

fn matrices<F: Field>(list: &[MatrixLiteral], path: &str) -> Result<Vec<Matrix<F>>, Fail> {
    list.iter().enumerate().map(|(i, m)| matrix(m, &format!("{path}[{i}]"))).collect()
}

/// Generators of `M_size`, including the identity.
fn full_algebra<F: Field>(size: usize) -> Vec<Matrix<F>> {
    let mut g = vec![Matrix::identity(size)];
    for i in 0..size.saturating_sub(1) {
        g.push(Matrix::unit(size, i, i + 1));
        g.push(Matrix::unit(size, i + 1, i));
    }
    g
}

/// Matrix units of `⊕ M_{bᵢ}` placed along the diagonal.
fn block_algebra<F: Field>(size: usize, blocks: &[usize]) -> Vec<Matrix<F>> {
    let mut g = Vec::new();
    let mut at = 0;
    for &b in blocks {
        for i in 0..b {
            for j in 0..b {
                g.push(Matrix::unit(size, at + i, at + j));
            }
        }
        at += b;
    }
    g
}

fn words(g: &PermGroup, list: &[String], path: &str) -> Result<Vec<Perm>, Fail> {
    list.iter()
        .enumerate()
        .map(|(i, w)| g.parse_element(w).map_err(|e| schema(format!("{path}[{i}]"), e)))
        .collect()
}

fn build<F: Field>(sc: &Scenario) -> Result<Built<F>, Fail> {
    let structural = |path: &'static str| {
        move |e: InclusionError| match Fail::from(e) {
            Fail::Other(s) => schema(path, s),
            f => f,
        }
    };
    let weights = match &sc.trace {
        Some(list) => Some(
            list.iter().enumerate().map(|(i, x)| literal::<F>(x, &format!("trace[{i}]"))).collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let unital = |mut gens: Vec<Matrix<F>>, size: usize| {
        gens.insert(0, Matrix::identity(size));
        gens
    };
    match sc.kind {
        Kind::GroupInclusion | Kind::Quadrilateral if sc.group.is_some() => {
            let g = PermGroup::named(sc.group.as_deref().unwrap_or_default()).map_err(|e| schema("group", e))?;
            let subs = sc.subgroups.clone().unwrap_or_default();
            let h = words(&g, &subs.n, "subgroups.n")?;
            let inc: Inclusion<F> = build_group_inclusion(&g, &h).map_err(structural("subgroups.n"))?;
            if sc.kind == Kind::GroupInclusion {
                return Ok(Built { inc, p: None, q: None, r: None, upper: None });
            }
            let alg = |list: &Option<Vec<String>>, path: &'static str| -> Result<Option<(Vec<Perm>, StarAlgebra<F>)>, Fail> {
                match list {
                    Some(l) => {
                        let w = words(&g, l, path)?;
                        let a = inc.subgroup_algebra(&w).map_err(structural(path))?;
                        Ok(Some((w, a)))
                    }
                    None => Ok(None),
                }
            };
            let (pw, p) = alg(&subs.p, "subgroups.p")?.ok_or_else(|| schema("subgroups.p", "required"))?;
            let (_, q) = alg(&subs.q, "subgroups.q")?.ok_or_else(|| schema("subgroups.q", "required"))?;
            let r = alg(&subs.r, "subgroups.r")?.map(|x| x.1);
            let quad = Quadrilateral::new(inc, p, q).map_err(structural("subgroups"))?;
            let upper = build_group_inclusion(&g, &pw).map_err(structural("subgroups.p"))?;
            Ok(Built { inc: quad.inclusion, p: Some(quad.p), q: Some(quad.q), r, upper: Some(upper) })
        }
        Kind::MatrixInclusion | Kind::Quadrilateral => {
            let size = sc.size.ok_or_else(|| schema("size", "required"))?;
            let gens = sc.generators.clone().unwrap_or_default();
            let m_gens = match &gens.m {
                Some(l) => matrices(l, "generators.m")?,
                None => full_algebra(size),
            };
            let n_gens = match (&sc.blocks, &gens.n) {
                (Some(b), _) if sc.kind == Kind::MatrixInclusion => block_algebra(size, b),
                (_, Some(l)) => matrices(l, "generators.n")?,
                _ => vec![Matrix::identity(size)],
            };
            let inc = build_matrix_inclusion(&sc.id, size, m_gens, n_gens, weights)
                .map_err(structural("generators"))?;
            if sc.kind == Kind::MatrixInclusion {
                return Ok(Built { inc, p: None, q: None, r: None, upper: None });
            }
            let sub = |list: &Option<Vec<MatrixLiteral>>, path: &'static str| -> Result<Option<StarAlgebra<F>>, Fail> {
                match list {
                    Some(l) => Ok(Some(
                        StarAlgebra::generated(size, unital(matrices(l, path)?, size)).map_err(structural(path))?,
                    )),
                    None => Ok(None),
                }
            };
            let p = sub(&gens.p, "generators.p")?.ok_or_else(|| schema("generators.p", "required"))?;
            let q = sub(&gens.q, "generators.q")?.ok_or_else(|| schema("generators.q", "required"))?;
            let r = sub(&gens.r, "generators.r")?;
            let quad = Quadrilateral::new(inc, p, q).map_err(structural("generators"))?;
            let upper = Inclusion::new(
                "P in M",
                quad.inclusion.m().clone(),
                quad.p.clone(),
                TraceSpec::Density(quad.inclusion.density().clone()),
            )
            .map_err(structural("generators.p"))?;
            Ok(Built { inc: quad.inclusion, p: Some(quad.p), q: Some(quad.q), r, upper: Some(upper) })
        }
        Kind::TensorInclusion => {
            let b = sc.blocks.as_deref().unwrap_or_default();
            let inc = build_tensor_inclusion(b[0], b[1]).map_err(structural("blocks"))?;
            Ok(Built { inc, p: None, q: None, r: None, upper: None })
        }
        Kind::GroupInclusion => Err(schema("group", "required")),
    }
}

fn digits(bits: u32) -> usize {
    ((bits as f64) * std::f64::consts::LOG10_2).floor() as usize - 2
}

/// Exact values as `{"exact", "decimal"}`, float values as numbers.
fn scalar<F: Field>(x: &F, bits: u32) -> Value {
    if F::EXACT {
        if let Some(q) = x.to_quadratic() {
            return json!({ "exact": q.to_string(), "decimal": evaluate_quadratic(&q, bits).to_decimal(digits(bits)) });
        }
    }
    json!(x.re())
}

fn agree<F: Field>(a: &F, b: &F, tol: f64) -> (bool, f64) {
    let r = a.sub_ref(b).magnitude();
    if F::EXACT {
        (a == b, r)
    } else {
        (r <= tol, r)
    }
}

fn within<F: Field>(residual: f64, exact_zero: bool, tol: f64) -> bool {
    if F::EXACT {
        exact_zero
    } else {
        residual <= tol
    }
}

fn run_in<F: Field>(ctx: &Ctx) -> Result<Outcome, Fail> {
    let start = Instant::now();
    let built = build::<F>(ctx.sc)?;
    let bc = basic_construction(&built.inc)?;
    let mut out = Outcome::new(ctx.sc, ctx.seed, ctx.bits);
    out.timing.push(("build".into(), start.elapsed().as_secs_f64() * 1e3));
    for a in ctx.sc.ordered_analyses() {
        let t = Instant::now();
        let res = match a {
            Analysis::Index => index(ctx, &built, &bc),
            Analysis::Basis => basis(ctx, &built, &bc),
            Analysis::Wahp => wahp(ctx, &built, &bc),
            Analysis::Singularity => singularity(ctx, &built, &bc),
            Analysis::Angle => angles(ctx, &built, &bc),
            Analysis::Landau => landau(ctx, &built, &bc),
            Analysis::TlEval => tl_section(ctx),
        };
        let section = match res {
            Ok(s) => s,
            Err(Fail::Other(msg)) => {
                let mut s = Section::default();
                s.values.insert("error".into(), json!(msg));
                s.checks.push(Check::new("completes without error", false, None));
                s
            }
            Err(f) => return Err(f),
        };
        out.timing.push((a.name().into(), t.elapsed().as_secs_f64() * 1e3));
        out.sections.push((a, section));
    }
    out.timing.push(("total".into(), start.elapsed().as_secs_f64() * 1e3));
    Ok(out)
}

fn index<F: Field>(ctx: &Ctx, b: &Built<F>, bc: &BasicConstruction<F>) -> Result<Section, Fail> {
    let inc = &b.inc;
    let mut s = Section::default();
    let e = bc.e_n();
    let one = Matrix::identity(e.rows());
    let tr_one = bc.tr(&one);
    let (ok, r) = agree(&tr_one, bc.index(), ctx.tol);
    s.checks.push(Check::new("Tr(1) = index", ok, Some(r)));

    let m = inc.m().basis();
    let left: Vec<Matrix<F>> = m.iter().map(|x| bc.left(x)).collect();
    let mut worst = 0.0f64;
    let mut exact = true;
    for (x, lx) in m.iter().zip(&left) {
        let lxe = lx.mul(e);
        for (y, ly) in m.iter().zip(&left) {
            let lhs = bc.tr(&lxe.mul(ly));
            let rhs = inc.tau(&x.mul(y));
            exact &= lhs == rhs;
            worst = worst.max(lhs.sub_ref(&rhs).magnitude());
        }
    }
    s.checks.push(Check::new("Tr(x e_N y) = tau(xy)", within::<F>(worst, exact, ctx.tol), Some(worst)));

    let mut worst = 0.0f64;
    let mut exact = true;
    for (x, lx) in m.iter().zip(&left) {
        let d = e.mul(lx).mul(e).sub(&bc.left(&inc.cond_expect(x)?).mul(e));
        exact &= d.is_zero();
        worst = worst.max(d.max_abs());
    }
    s.checks.push(Check::new("e_N x e_N = E_N(x) e_N", within::<F>(worst, exact, ctx.tol), Some(worst)));

    s.values.insert("index".into(), scalar(bc.index(), ctx.bits));
    s.values.insert("tr_one".into(), scalar(&tr_one, ctx.bits));
    s.values.insert("m_blocks".into(), json!(inc.m_block_sizes()));
    s.values.insert("n_blocks".into(), json!(inc.n_block_sizes()));
    s.values.insert("inclusion_matrix".into(), json!(inc.lambda()));
    s.values.insert("m1_dim".into(), json!(bc.m1_dim()));
    s.values.insert("pairs_checked".into(), json!(m.len() * m.len()));
    if let Ok(md) = inc.markov_data() {
        s.values.insert("connected".into(), json!(md.connected));
        s.values.insert("perron_frobenius_index".into(), json!(md.index));
    }
    Ok(s)
}

fn basis<F: Field>(ctx: &Ctx, b: &Built<F>, bc: &BasicConstruction<F>) -> Result<Section, Fail> {
    let inc = &b.inc;
    let pp = pimsner_popa_basis(inc, bc)?;
    let mut s = Section::default();
    let dim = bc.e_n().rows();
    let total = pp.projections.iter().fold(Matrix::zeros(dim, dim), |acc, p| acc.add(p));
    let d = total.sub(&Matrix::identity(dim));
    s.checks.push(Check::new(
        "sum lambda_j e_N lambda_j* = 1",
        within::<F>(d.max_abs(), d.is_zero(), ctx.tol),
        Some(d.max_abs()),
    ));
    let mut worst = 0.0f64;
    let mut exact = true;
    for (i, li) in pp.lambdas.iter().enumerate() {
        for (j, lj) in pp.lambdas.iter().enumerate() {
            let got = inc.cond_expect(&li.adjoint().mul(lj))?;
            let want = if i == j { pp.supports[j].clone() } else { Matrix::zeros(got.rows(), got.cols()) };
            let d = got.sub(&want);
            exact &= d.is_zero();
            worst = worst.max(d.max_abs());
        }
    }
    s.checks.push(Check::new("E_N(lambda_i* lambda_j) = delta_ij q_j", within::<F>(worst, exact, ctx.tol), Some(worst)));
    let mut worst = 0.0f64;
    let mut exact = true;
    for x in inc.m().basis() {
        let d = pp.expand(inc, x)?.sub(x);
        exact &= d.is_zero();
        worst = worst.max(d.max_abs());
    }
    s.checks.push(Check::new("x = sum lambda_j E_N(lambda_j* x)", within::<F>(worst, exact, ctx.tol), Some(worst)));
    s.values.insert("size".into(), json!(pp.len()));
    let traces: Vec<Value> = pp.supports.iter().map(|q| scalar(&inc.tau(q), ctx.bits)).collect();
    s.values.insert("support_traces".into(), Value::Array(traces));
    Ok(s)
}

/// Group elements of `H`, as exact unitaries of `N`.
fn subgroup_unitaries<F: Field>(inc: &Inclusion<F>) -> Vec<Matrix<F>> {
    let mut us = vec![Matrix::identity(inc.size())];
    if let Some(g) = inc.group() {
        for &i in &g.subgroup {
            let x = &g.group.elements()[i];
            if !x.is_identity() {
                us.push(g.group.regular(x));
            }
        }
    }
    us
}

fn wahp<F: Field>(ctx: &Ctx, b: &Built<F>, _bc: &BasicConstruction<F>) -> Result<Section, Fail> {
    let (inc, label) = match &b.upper {
        Some(u) => (u, "P in M"),
        None => (&b.inc, "N in M"),
    };
    let bc = basic_construction(inc)?;
    let pp = pimsner_popa_basis(inc, &bc)?;
    let exact = wahp_witness(inc, &bc, &pp, &subgroup_unitaries(inc))?;

    let float = inc.to_float();
    let fbc = basic_construction(&float)?;
    let fpp = pimsner_popa_basis(&float, &fbc)?;
    let count = ctx.sc.budget.unitaries;
    let us = random_unitaries(float.n(), count, ctx.seed);
    let sampled = wahp_witness(&float, &fbc, &fpp, &us)?;

    let mut s = Section::default();
    let exact_ok = exact.samples.iter().all(|x| within::<F>(x.residual, x.sum == exact.target, WAHP_TOL));
    s.checks.push(Check::new("sum = I - 1 on unitaries of the subgroup", exact_ok, Some(exact.max_residual)));
    s.checks.push(Check::new(
        "sum = I - 1 on sampled unitaries of N",
        sampled.max_residual <= WAHP_TOL,
        Some(sampled.max_residual),
    ));
    s.checks.push(Check::new(
        "largest term >= sqrt(I-1)/(k-1)",
        exact.samples.iter().all(|x| x.bound_holds) && sampled.samples.iter().all(|x| x.bound_holds),
        None,
    ));
    s.checks.push(Check::new("1 - e_N is a projection in N'∩M1 with Tr = I - 1", exact.obstruction_valid, None));
    s.values.insert("inclusion".into(), json!(label));
    s.values.insert("basis_size".into(), json!(exact.basis_size));
    s.values.insert("target".into(), scalar(&exact.target, ctx.bits));
    s.values.insert("sum".into(), scalar(&exact.samples[0].sum, ctx.bits));
    s.values.insert("bound".into(), json!(exact.bound));
    s.values.insert("obstruction_trace".into(), scalar(&exact.obstruction_trace, ctx.bits));
    s.values.insert("sampled_unitaries".into(), json!(count));
    s.values.insert("sampled_max_residual".into(), json!(sampled.max_residual));
    Ok(s)
}

fn report_json<F: Field>(label: &str, r: &SingularityReport<F>, bits: u32) -> Value {
    let mut flags = Map::new();
    for (name, ok) in &r.flags {
        flags.insert((*name).into(), json!(ok));
    }
    json!({
        "u": label,
        "k": scalar(&r.k, bits),
        "norm_lower": r.norm.lower,
        "norm_estimate": r.norm.estimate,
        "norm_complete": r.norm.complete,
        "ratio": r.ratio,
        "beta": r.beta.as_ref().map(|b| json!([scalar(&b.roots.0, bits), scalar(&b.roots.1, bits)])),
        "alpha_coeffs": [scalar(&r.alpha_coeffs.0, bits), scalar(&r.alpha_coeffs.1, bits)],
        "commutant_dim": r.minimal.commutant_dim,
        "tr_h": scalar(&r.minimal.trace_h, bits),
        "tr_e_n_h": scalar(&r.minimal.tr_en_h, bits),
        "chain_lhs": scalar(&r.minimal.chain_lhs, bits),
        "chain_rhs": scalar(&r.minimal.chain_rhs, bits),
        "corollary_applicable": r.corollary.applicable,
        "flags": flags,
    })
}

fn normalizes<F: Field>(inc: &Inclusion<F>, u: &Matrix<F>) -> bool {
    let us = u.adjoint();
    inc.n().basis().iter().all(|x| inc.n().contains(&u.mul(x).mul(&us)))
}

fn singularity<F: Field>(ctx: &Ctx, b: &Built<F>, bc: &BasicConstruction<F>) -> Result<Section, Fail> {
    let inc = &b.inc;
    let float = inc.to_float();
    let fbc = basic_construction(&float)?;
    let scan = singularity_scan(inc, &ctx.budget, ctx.seed)?;
    let mut s = Section::default();
    let mut complete = scan.complete;
    let mut reports = Vec::new();

    let mut exact_us = Vec::new();
    if let Some(g) = inc.group() {
        for (i, x) in g.group.elements().iter().enumerate() {
            if g.subgroup.contains(&i) {
                continue;
            }
            let u = g.group.regular::<F>(x);
            if !normalizes(inc, &u) && exact_us.len() < ctx.budget.samples.max(1) {
                exact_us.push((x.to_string(), u));
            }
        }
    }
    for (n, (label, u)) in exact_us.iter().enumerate() {
        let r = singularity_report(inc, bc, &float, u, &ctx.budget, ctx.seed.wrapping_add(n as u64))?;
        complete &= r.norm.complete;
        for (name, ok) in &r.flags {
            s.checks.push(Check::new(&format!("u={label}: {name}"), *ok, None));
        }
        reports.push(report_json(label, &r, ctx.bits));
    }
    if exact_us.is_empty() {
        let us = random_unitaries(float.m(), ctx.budget.samples, ctx.seed ^ 0x5eed);
        for (n, u) in us.iter().enumerate() {
            let label = format!("random[{n}]");
            let r = singularity_report(&float, &fbc, &float, u, &ctx.budget, ctx.seed.wrapping_add(n as u64))?;
            complete &= r.norm.complete;
            for (name, ok) in &r.flags {
                s.checks.push(Check::new(&format!("u={label}: {name}"), *ok, None));
            }
            reports.push(report_json(&label, &r, ctx.bits));
        }
    }

    let count = ctx.sc.budget.minimal;
    let mut worst = [0.0f64; 3];
    let mut chain = true;
    let mut beta_ok = true;
    let mut two_dim = 0usize;
    for u in random_unitaries(float.m(), count, ctx.seed ^ 0xa11) {
        let m = minimal_element(&float, &fbc, &u)?;
        worst[0] = worst[0].max(m.trace_residual());
        worst[1] = worst[1].max(m.exchange_residual());
        worst[2] = worst[2].max(m.coefficient_residual());
        chain &= m.chain_bounded();
        beta_ok &= beta_quadratic(&m.lambda, &m.k).is_ok();
        two_dim += usize::from(m.two_dim_formula.is_some());
    }
    s.checks.push(Check::new("sampled: Tr(h) = 1", worst[0] <= ctx.tol, Some(worst[0])));
    s.checks.push(Check::new("sampled: Tr(e_N h) = Tr(h^2)", worst[1] <= ctx.tol, Some(worst[1])));
    s.checks.push(Check::new("sampled: span coefficients (1-k, k/lambda)", worst[2] <= ctx.tol, Some(worst[2])));
    s.checks.push(Check::new("sampled: 1 - Tr(e_N h) <= k(2-(1+1/lambda)k)", chain, None));
    s.checks.push(Check::new("sampled: beta roots back-substitute", beta_ok, None));

    let normalizers: Vec<Value> = scan
        .normalizers
        .iter()
        .map(|n| json!({ "u": n.label, "outside_n": n.outside_n, "residual": n.residual }))
        .collect();
    let ratios: Vec<Value> = scan
        .non_normalizing
        .iter()
        .map(|r| {
            json!({
                "u": r.label, "k": r.k, "e_n_zero": r.e_n_zero, "norm_lower": r.norm_lower,
                "norm_estimate": r.norm_estimate, "ratio": r.ratio, "complete": r.complete,
            })
        })
        .collect();
    s.values.insert("normalizers".into(), Value::Array(normalizers));
    s.values.insert("normalizers_outside_n".into(), json!(scan.normalizers_outside_n));
    s.values.insert("strongly_singular_candidate".into(), json!(scan.none_found()));
    s.values.insert("ratios".into(), Value::Array(ratios));
    s.values.insert("empirical_alpha".into(), json!(scan.empirical_alpha));
    s.values.insert("reports".into(), Value::Array(reports));
    s.values.insert("sampled_unitaries".into(), json!(count));
    s.values.insert("sampled_two_dim_commutant".into(), json!(two_dim));
    let ss = bc.index().to_quadratic().filter(|_| F::EXACT).and_then(|q| ss_constant(&q, ctx.bits).ok());
    s.values.insert(
        "ss_constant".into(),
        match ss {
            Some(c) => json!({
                "exact": c.exact.map(|x| x.to_string()),
                "radicand": c.radicand.to_string(),
                "decimal": c.decimal,
            }),
            None => json!(scan.ss_constant),
        },
    );
    s.complete = complete;
    Ok(s)
}

fn pair<F: Field>(b: &Built<F>) -> Result<(&StarAlgebra<F>, &StarAlgebra<F>), Fail> {
    match (&b.p, &b.q) {
        (Some(p), Some(q)) => Ok((p, q)),
        _ => Err(schema("analyses", "needs a quadrilateral")),
    }
}

fn angles<F: Field>(_ctx: &Ctx, b: &Built<F>, bc: &BasicConstruction<F>) -> Result<Section, Fail> {
    let (p, q) = pair(b)?;
    let r = angle(&b.inc, bc, p, q)?;
    let swapped = angle(&b.inc, bc, q, p)?;
    let mut s = Section::default();
    let in_range = r.eigenvalues.iter().all(|&x| (-ANGLE_TOL..=1.0 + ANGLE_TOL).contains(&x));
    s.checks.push(Check::new("eigenvalues in [0, 1]", in_range, None));
    let gap = r
        .eigenvalues
        .iter()
        .zip(&swapped.eigenvalues)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let same = r.eigenvalues.len() == swapped.eigenvalues.len() && gap <= ANGLE_TOL;
    s.checks.push(Check::new("spectrum symmetric in P and Q", same, Some(gap)));
    s.values.insert("eigenvalues".into(), json!(r.eigenvalues));
    s.values.insert("angles".into(), json!(r.angles));
    s.values.insert("lambda_min".into(), json!(r.lambda_min));
    s.values.insert("lambda_max".into(), json!(r.lambda_max));
    Ok(s)
}

fn landau<F: Field>(ctx: &Ctx, b: &Built<F>, bc: &BasicConstruction<F>) -> Result<Section, Fail> {
    let (p, q) = pair(b)?;
    let model = FourierModel::new(&b.inc, bc)?;
    let l = landau_check(&b.inc, bc, &model, p, q)?;
    let mut s = Section::default();
    s.checks.push(Check::new(
        "e_P o e_Q = (Tr(e_P e_Q)/delta) e_PQ",
        within::<F>(l.product_residual, l.product_holds, ctx.tol),
        Some(l.product_residual),
    ));
    s.checks.push(Check::new("Tr(e_PQ) Tr(e_P e_Q) = Tr(e_P) Tr(e_Q)", l.trace_identity_holds, None));
    if let Some(r) = &b.r {
        let (a, c, d) = vanishing_check(&b.inc, bc, &model, p, r)?;
        let worst = a.max(c).max(d);
        s.checks.push(Check::new("(2e_R - 1) o e_P vanishes", worst <= VANISHING_TOL, Some(worst)));
    }
    let overlap = tl_overlap(&model, bc)?;
    s.checks.push(Check::new("TL coproduct matches the Fourier model", overlap.iter().all(|e| e.agrees), None));
    s.values.insert("delta".into(), scalar(&model.delta, ctx.bits));
    s.values.insert("tr_p".into(), scalar(&l.tr_p, ctx.bits));
    s.values.insert("tr_q".into(), scalar(&l.tr_q, ctx.bits));
    s.values.insert("tr_pq".into(), scalar(&l.tr_pq, ctx.bits));
    s.values.insert("tr_p_times_q".into(), scalar(&l.tr_p_times_q, ctx.bits));
    s.values.insert("product_residual".into(), json!(l.product_residual));
    Ok(s)
}

fn tl_section(ctx: &Ctx) -> Result<Section, Fail> {
    let delta: Option<DeltaValue> = match &ctx.sc.delta {
        Some(d) => Some(d.parse().map_err(|e| schema("delta", e))?),
        None => None,
    };
    let mut s = Section::default();
    let mut values = Vec::new();
    for (i, expr) in ctx.sc.expressions.iter().enumerate() {
        let v = match &delta {
            Some(d) => tl_eval_at(expr, d),
            None => tl_eval(expr).map(|v| v.to_string()),
        }
        .map_err(|e| schema(format!("expressions[{i}]"), e))?;
        values.push(json!({ "expr": expr, "value": v }));
    }
    s.values.insert("results".into(), Value::Array(values));
    Ok(s)
}
