//! One runner per subcommand: parameters in, outputs plus checks out.

use crate::report::{field_descriptor, padic_value_terms, qexp_terms, rat_str, CheckOut};
use padic_stringy::cyclotomic::Cyclotomic;
use padic_stringy::duality::{
    check_euler, check_selfdual, curve_battery, ec_count, ec_group, ec_torsion_module,
    DualityError, EllipticCurveModel,
};
use padic_stringy::ff::{ff_make_field, FieldSpec};
use padic_stringy::galois::{
    burnside_check, twist_pointcount, twist_pointcount_brute, FinAbGroup, GammaVarietyAction,
    LinearDiagonalAction,
};
use padic_stringy::localfield::parse_series;
use padic_stringy::mirrorsim::{global_identity, make_model_from_curve, DualPairModel, FiberModel};
use padic_stringy::numeric::{rat, Rat};
use padic_stringy::orbifold::{
    builtin_smooth_models, orb_fiber_volume_1d, orb_total_volume, shifts, specialize_1d,
    weil_volume, LinearCyclicAction, StratumPoint,
};
use padic_stringy::qexp::QExp;
use padic_stringy::stringy::{
    strata_from_action, stringy_count, stringy_epoly, xi_reindex, GerbeData,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Invalid-input failures; the driver maps these to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn bad(msg: impl Into<String>) -> InputError {
    InputError(msg.into())
}

/// Factor a claimed prime power q = p^m.
pub fn field_from_q(q: u64) -> Result<FieldSpec, InputError> {
    if q < 2 {
        return Err(bad(format!("q = {q} is not a prime power")));
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut m = 0;
            let mut rest = q;
            while rest.is_multiple_of(p) {
                rest /= p;
                m += 1;
            }
            if rest != 1 {
                return Err(bad(format!("q = {q} is not a prime power")));
            }
            return ff_make_field(p, m).map_err(|e| bad(e.to_string()));
        }
        p += 1;
    }
    ff_make_field(q, 1).map_err(|e| bad(e.to_string()))
}

pub struct CommandOutput {
    pub outputs: Value,
    pub checks: Vec<CheckOut>,
    pub precision_used: Option<i64>,
}

// --- orbvol -------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct OrbvolParams {
    pub d: u64,
    pub weights: Vec<u64>,
    pub q: u64,
    #[serde(default)]
    pub k: Option<i64>,
    /// Optional integral point `c*t^e + ... + O(t^k)` to specialize.
    #[serde(default)]
    pub probe: Option<String>,
}

pub fn run_orbvol(p: &OrbvolParams) -> Result<CommandOutput, InputError> {
    let field = field_from_q(p.q)?;
    if p.weights.is_empty() {
        return Err(bad("weights must be nonempty"));
    }
    let action = LinearCyclicAction::new(p.d, p.weights.clone(), field.clone())
        .map_err(|e| bad(e.to_string()))?;
    let k = p.k.unwrap_or(3 * p.d.max(1) as i64 + 2);
    let mut checks = Vec::new();

    let records = shifts(&action, 1);
    let shift_rows: Vec<Value> = records
        .iter()
        .map(|r| {
            json!({
                "j": r.j,
                "fixed_dim": r.fixed_dim,
                "f_shift": rat_str(&r.f_shift),
                "weight": rat_str(&r.weight),
            })
        })
        .collect();

    // per-weight one-dimensional blocks against the closed form
    for e in 1..=p.d.max(1) {
        match orb_fiber_volume_1d(p.d, e, &field, k.max((e + 2 * p.d) as i64)) {
            Ok(v) => checks.push(CheckOut::new(
                format!("block d={} e={e}: finite level equals closed form", p.d),
                "Theorem A.1; Prop. A.3",
                v.agrees(field.p(), field.m()),
            )),
            Err(err) => checks.push(CheckOut::new(
                format!("block d={} e={e}: {err}", p.d),
                "Theorem A.1; Prop. A.3",
                false,
            )),
        }
    }

    let total = orb_total_volume(&action, k).map_err(|e| bad(e.to_string()))?;
    let mut sectors = Vec::new();
    for sector in &total.sectors {
        let finite = sector.volume.reduce_at(field.p(), field.m());
        let closed = QExp::term(-sector.weight.clone(), sector.stratum_count.clone());
        let agree = sector.volume.value_eq(&closed, field.p(), field.m());
        checks.push(CheckOut::new(
            format!("sector j={}: finite level equals count.q^(-w)", sector.j),
            "Theorem A.1",
            agree,
        ));
        sectors.push(json!({
            "j": sector.j,
            "weight": rat_str(&sector.weight),
            "fixed_dim": sector.fixed_dim,
            "stratum_count": rat_str(&sector.stratum_count),
            "finite_level": padic_value_terms(&finite),
            "closed_form": qexp_terms(&closed),
        }));
    }

    let diag = action.as_diagonal();
    let table = strata_from_action(&diag, 1).map_err(|e| bad(e.to_string()))?;
    let count = stringy_count(&table, None).map_err(|e| bad(e.to_string()))?;
    let qn = QExp::power(rat(action.dim() as i64));
    checks.push(CheckOut::new(
        "total volume times q^n equals the stringy count",
        "intro Theorem",
        total.total.mul(&qn).value_eq(&count, field.p(), field.m()),
    ));
    let refined = orb_total_volume(&action, k + 1).map_err(|e| bad(e.to_string()))?;
    checks.push(CheckOut::new(
        format!("volume stable between k = {k} and k + 1"),
        "Theorem A.1; Prop. A.3",
        total.total.value_eq(&refined.total, field.p(), field.m()),
    ));

    let reduced = total.total.reduce_at(field.p(), field.m());
    let mut outputs = json!({
        "field": field_descriptor(field.q(), field.p(), field.m()),
        "shifts": shift_rows,
        "sectors": sectors,
        "total_volume": padic_value_terms(&reduced),
        "stringy_count_terms": qexp_terms(&count),
    });
    if let Some(r) = reduced.as_rational() {
        outputs["total_volume_rational"] = Value::String(rat_str(&r));
    }
    if let Some(probe) = &p.probe {
        let u = parse_series(&field, probe).map_err(|e| bad(e.to_string()))?;
        let s = specialize_1d(&u, p.d).map_err(|e| bad(e.to_string()))?;
        outputs["probe"] = json!({
            "series": probe,
            "class": {"unr": s.class.unr, "ram": s.class.ram},
            "inertia_power": s.inertia_power,
            "stratum": match s.stratum {
                StratumPoint::Origin => json!("origin"),
                StratumPoint::FreeLocus(x) => json!({"free_locus_residue": x.index()}),
            },
        });
    }
    Ok(CommandOutput {
        outputs,
        checks,
        precision_used: Some(k),
    })
}

// --- stringy -------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct StringyParams {
    pub d: u64,
    pub weights: Vec<u64>,
    pub q: u64,
    /// Sector character exponents κ_{γ^j}, one entry per j ∈ Z/d; entry 0
    /// must be 0.
    #[serde(default)]
    pub gerbe: Option<Vec<u64>>,
}

pub fn run_stringy(p: &StringyParams) -> Result<CommandOutput, InputError> {
    let field = field_from_q(p.q)?;
    let action = LinearDiagonalAction::cyclic(p.d, &p.weights, field.clone())
        .map_err(|e| bad(e.to_string()))?;
    let group = action.group().clone();
    let gerbe = match &p.gerbe {
        None => None,
        Some(exps) => {
            if exps.len() != p.d.max(1) as usize {
                return Err(bad(format!("gerbe table must have {} entries", p.d)));
            }
            if exps[0] % p.d.max(1) != 0 {
                return Err(bad("identity sector character must be trivial"));
            }
            let kappas = group
                .elements()
                .into_iter()
                .map(|g| {
                    let j = g.first().copied().unwrap_or(0) as usize;
                    let chi = if p.d == 1 {
                        group.trivial_character()
                    } else {
                        group.character(vec![exps[j] % p.d])
                    };
                    (g.clone(), chi)
                })
                .collect();
            Some(GerbeData::new(&group, kappas))
        }
    };

    let table = strata_from_action(&action, 1).map_err(|e| bad(e.to_string()))?;
    let count = stringy_count(&table, gerbe.as_ref()).map_err(|e| bad(e.to_string()))?;
    let epoly = stringy_epoly(&table, gerbe.as_ref()).map_err(|e| bad(e.to_string()))?;

    let mut checks = Vec::new();
    checks.push(CheckOut::new(
        "xy -> q specialization of E_st equals the stringy count",
        "Definition 2.3",
        epoly.specialize_xy().value_eq(&count, field.p(), field.m()),
    ));
    let mut xi_ok = true;
    for c in 1..p.d.max(1) {
        if padic_stringy::cyclotomic::gcd(c, p.d) != 1 {
            continue;
        }
        let re = xi_reindex(&table, c).map_err(|e| bad(e.to_string()))?;
        xi_ok &= stringy_count(&re, gerbe.as_ref()).map_err(|e| bad(e.to_string()))? == count;
        xi_ok &= stringy_epoly(&re, gerbe.as_ref()).map_err(|e| bad(e.to_string()))? == epoly;
    }
    checks.push(CheckOut::new(
        "stringy invariants unchanged under every valid reindexing",
        "Definition 2.3",
        xi_ok,
    ));

    let sector_breakdown: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "gamma": r.gamma,
                "component": r.component,
                "f_shift": rat_str(&r.f_shift),
                "fixed_dim": r.fixed_dim,
                "count": rat_str(&r.count),
            })
        })
        .collect();
    let epoly_terms: Vec<Value> = epoly
        .terms()
        .map(|((u, v), c)| json!({"x_exponent": rat_str(u), "y_exponent": rat_str(v), "coefficient": c}))
        .collect();
    let outputs = json!({
        "field": field_descriptor(field.q(), field.p(), field.m()),
        "count_terms": qexp_terms(&count),
        "epoly_terms": epoly_terms,
        "sector_breakdown": sector_breakdown,
        "xi_invariance_checked": true,
    });
    Ok(CommandOutput {
        outputs,
        checks,
        precision_used: None,
    })
}

// --- weil ----------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct WeilParams {
    pub model: String,
    pub q: u64,
    #[serde(default)]
    pub k: Option<i64>,
}

pub fn run_weil(p: &WeilParams) -> Result<CommandOutput, InputError> {
    let field = field_from_q(p.q)?;
    let k = p.k.unwrap_or(3);
    let model = builtin_smooth_models()
        .into_iter()
        .find(|m| m.name == p.model)
        .ok_or_else(|| {
            bad(format!(
                "unknown model {:?}; built-ins: {}",
                p.model,
                builtin_smooth_models()
                    .iter()
                    .map(|m| m.name.clone())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
    let mut checks = Vec::new();
    let outputs = match weil_volume(&model, &field, k) {
        Ok(rep) => {
            let expected = Rat::from_integer(rep.residue_count.into())
                / padic_stringy::numeric::rat_pow(
                    &rat(field.q() as i64),
                    &num_bigint::BigInt::from(rep.dim as i64),
                );
            checks.push(CheckOut::new(
                format!("#X(O/t^j)/q^(j dim) constant over j = 1..{k} and equal to #X(F_q)/q^dim"),
                "eqn:weil",
                rep.value == expected,
            ));
            json!({
                "field": field_descriptor(field.q(), field.p(), field.m()),
                "model": model.name,
                "dim": rep.dim,
                "counts": rep.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "value": rat_str(&rep.value),
            })
        }
        Err(e) => {
            checks.push(CheckOut::new(format!("{e}"), "eqn:weil", false));
            json!({
                "field": field_descriptor(field.q(), field.p(), field.m()),
                "model": model.name,
                "error": e.to_string(),
            })
        }
    };
    Ok(CommandOutput {
        outputs,
        checks,
        precision_used: Some(k),
    })
}

// --- twist-count ----------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct TwistCountParams {
    pub d: u64,
    pub weights: Vec<u64>,
    pub q: u64,
    #[serde(default)]
    pub m_max: Option<u32>,
}

pub fn run_twist_count(p: &TwistCountParams) -> Result<CommandOutput, InputError> {
    let field = field_from_q(p.q)?;
    let action = GammaVarietyAction::Linear(
        LinearDiagonalAction::cyclic(p.d, &p.weights, field.clone())
            .map_err(|e| bad(e.to_string()))?,
    );
    let m_max = p.m_max.unwrap_or(4).clamp(1, 4);
    let mut checks = Vec::new();
    let rep = burnside_check(&action).map_err(|e| bad(e.to_string()))?;
    checks.push(CheckOut::new(
        "groupoid count equals the average of twisted counts",
        "Cor. 3.13",
        rep.equal,
    ));
    let mut zeta_rows = Vec::new();
    let mut zeta_ok = true;
    let mut zeta_cases = 0;
    for tau in action.group().elements() {
        for m in 1..=m_max {
            let alg = twist_pointcount(&action, &tau, m).map_err(|e| bad(e.to_string()))?;
            let brute = twist_pointcount_brute(&action, &tau, m).map_err(|e| bad(e.to_string()))?;
            if let Some(b) = brute {
                zeta_cases += 1;
                zeta_ok &= alg == b;
            }
            zeta_rows.push(json!({
                "tau": tau,
                "m": m,
                "count": alg.to_string(),
                "brute_checked": brute.is_some(),
            }));
        }
    }
    checks.push(CheckOut::new(
        format!("twisted counts match (tau.Fr)^m fixed points in {zeta_cases} enumerable cases"),
        "Prop. 3.12",
        zeta_ok,
    ));
    let outputs = json!({
        "field": field_descriptor(field.q(), field.p(), field.m()),
        "per_twist": rep
            .per_twist
            .iter()
            .map(|(tau, n)| json!({"tau": tau, "count": n.to_string()}))
            .collect::<Vec<_>>(),
        "groupoid_count": rat_str(&rep.groupoid_count),
        "twist_average": rat_str(&rep.twist_average),
        "twisted_counts": zeta_rows,
    });
    Ok(CommandOutput {
        outputs,
        checks,
        precision_used: None,
    })
}

// --- euler / selfdual -------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct CurveBatteryParams {
    pub q: u64,
    /// Single curve \[a1, a2, a3, a4, a6\]; omitted means the battery.
    #[serde(default)]
    pub curve: Option<Vec<i64>>,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub count: Option<usize>,
}

fn battery_curves(
    field: &FieldSpec,
    params: &CurveBatteryParams,
) -> Result<Vec<EllipticCurveModel>, InputError> {
    match &params.curve {
        Some(coeffs) => {
            if coeffs.len() != 5 {
                return Err(bad("curve must be [a1, a2, a3, a4, a6]"));
            }
            let c: [i64; 5] = [coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]];
            Ok(vec![
                EllipticCurveModel::new(field, c).map_err(|e| bad(e.to_string()))?
            ])
        }
        None => Ok(curve_battery(field, params.count.unwrap_or(20))),
    }
}

fn n_values(params: &CurveBatteryParams, p: u64) -> Vec<u64> {
    match params.n {
        Some(n) => vec![n],
        None => [2u64, 3, 4]
            .iter()
            .copied()
            .filter(|n| n % p != 0)
            .collect(),
    }
}

pub fn run_euler(params: &CurveBatteryParams) -> Result<CommandOutput, InputError> {
    let field = field_from_q(params.q)?;
    let curves = battery_curves(&field, params)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for curve in &curves {
        let coeffs: Vec<u64> = curve.coeffs().iter().map(|a| a.index()).collect();
        let point_count = ec_count(curve, 1).map_err(|e| bad(e.to_string()))?;
        let group = ec_group(curve).map_err(|e| bad(e.to_string()))?;
        for n in n_values(params, field.p()) {
            if n % field.p() == 0 {
                return Err(bad(format!("n = {n} shares the characteristic")));
            }
            match ec_torsion_module(curve, n) {
                Ok(module) => {
                    let rep = check_euler(&module);
                    checks.push(CheckOut::new(
                        format!("curve {coeffs:?}, n={n}: |H1| = |M(F)|.|M_dual(F)|"),
                        "Theorem 3.5",
                        rep.pass,
                    ));
                    rows.push(json!({
                        "curve": coeffs,
                        "point_count": point_count,
                        "group": group.factors(),
                        "n": n,
                        "sigma": module.sigma,
                        "m_points": rep.m_points,
                        "m_dual_points": rep.m_dual_points,
                        "h1_size": rep.h1,
                        "pass": rep.pass,
                    }));
                }
                Err(DualityError::TorsionFieldTooLarge) => {
                    rows.push(json!({
                        "curve": coeffs,
                        "n": n,
                        "skipped": "torsion field beyond the scale cap",
                    }));
                }
                Err(e) => return Err(bad(e.to_string())),
            }
        }
    }
    Ok(CommandOutput {
        outputs: json!({
            "field": field_descriptor(field.q(), field.p(), field.m()),
            "curves": rows,
        }),
        checks,
        precision_used: None,
    })
}

pub fn run_selfdual(params: &CurveBatteryParams) -> Result<CommandOutput, InputError> {
    let field = field_from_q(params.q)?;
    let curves = battery_curves(&field, params)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for curve in &curves {
        let coeffs: Vec<u64> = curve.coeffs().iter().map(|a| a.index()).collect();
        let group = ec_group(curve).map_err(|e| bad(e.to_string()))?;
        for n in n_values(params, field.p()) {
            if n % field.p() == 0 {
                return Err(bad(format!("n = {n} shares the characteristic")));
            }
            let rep = check_selfdual(curve, n).map_err(|e| bad(e.to_string()))?;
            checks.push(CheckOut::new(
                format!("curve {coeffs:?}, n={n}: |E/nE| = |E[n]|"),
                "Prop. 3.16",
                rep.pass,
            ));
            rows.push(json!({
                "curve": coeffs,
                "n": n,
                "group": group.factors(),
                "group_order": rep.group_order,
                "cokernel": rep.cokernel,
                "kernel": rep.kernel,
                "pass": rep.pass,
            }));
        }
    }
    Ok(CommandOutput {
        outputs: json!({
            "field": field_descriptor(field.q(), field.p(), field.m()),
            "curves": rows,
        }),
        checks,
        precision_used: None,
    })
}

// --- mirror-sim -------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct MirrorSimParams {
    /// Group syntax `"Z/2 x Z/4"`; exclusive with `curve`.
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub curve: Option<Vec<i64>>,
    #[serde(default)]
    pub q: Option<u64>,
    #[serde(default)]
    pub n: Option<u64>,
    pub fibers: usize,
    pub seed: u64,
    /// Root of unity ξ as \[order, power\]; defaults to 1.
    #[serde(default)]
    pub xi: Option<[u64; 2]>,
}

pub fn run_mirror_sim(params: &MirrorSimParams) -> Result<CommandOutput, InputError> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    let mut model = match (&params.group, &params.curve) {
        (Some(_), Some(_)) => return Err(bad("give either group or curve, not both")),
        (Some(gs), None) => {
            let group = FinAbGroup::parse(gs).map_err(InputError)?;
            let phi: Vec<Vec<u64>> = (0..group.rank()).map(|i| group.generator(i)).collect();
            let norm = Rat::from_integer(group.order().max(1).into());
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
            let fibers = (0..params.fibers)
                .map(|_| {
                    let t1e: Vec<u64> = group
                        .factors()
                        .iter()
                        .map(|&d| rng.gen_range(0..d))
                        .collect();
                    let t2e: Vec<u64> = group
                        .factors()
                        .iter()
                        .map(|&d| rng.gen_range(0..d))
                        .collect();
                    FiberModel::new(
                        group.clone(),
                        group.clone(),
                        phi.clone(),
                        group.character(t1e),
                        group.character(t2e),
                        norm.clone(),
                    )
                })
                .collect();
            DualPairModel { fibers }
        }
        (None, Some(coeffs)) => {
            let q = params.q.ok_or_else(|| bad("curve mode needs q"))?;
            let n = params.n.ok_or_else(|| bad("curve mode needs n"))?;
            let field = field_from_q(q)?;
            if coeffs.len() != 5 {
                return Err(bad("curve must be [a1, a2, a3, a4, a6]"));
            }
            let c: [i64; 5] = [coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]];
            let curve = EllipticCurveModel::new(&field, c).map_err(|e| bad(e.to_string()))?;
            make_model_from_curve(&curve, n, params.fibers, params.seed)
                .map_err(|e| bad(e.to_string()))?
        }
        (None, None) => return Err(bad("give a group or a curve")),
    };
    let mut xi_sensitivity: Option<bool> = None;
    if let Some([order, power]) = params.xi {
        if order == 0 {
            return Err(bad("xi order must be positive"));
        }
        let baseline = global_identity(&model).map_err(|e| bad(e.to_string()))?;
        let xi = Cyclotomic::root(order, power);
        model.fibers = model
            .fibers
            .into_iter()
            .map(|f| f.with_xi(xi.clone()))
            .collect();
        let twisted = global_identity(&model).map_err(|e| bad(e.to_string()))?;
        // the vanishing cases must stay exactly zero for any root of unity
        let stable = baseline
            .per_fiber
            .iter()
            .zip(&twisted.per_fiber)
            .all(|(a, b)| a.case.label() == 4 || (a.i1 == b.i1 && a.i2 == b.i2));
        xi_sensitivity = Some(stable);
    }

    let report = global_identity(&model).map_err(|e| bad(e.to_string()))?;
    let per_fiber: Vec<Value> = report
        .per_fiber
        .iter()
        .zip(&model.fibers)
        .map(|(ints, fiber)| {
            json!({
                "case": ints.case.label(),
                "i1": rat_str(&ints.i1),
                "i2": rat_str(&ints.i2),
                "kernel": fiber.kernel_size(),
            })
        })
        .collect();
    let mut checks = vec![
        CheckOut::new(
            "every fibre satisfies I1 = I2",
            "Prop. 4.11",
            report.per_fiber.iter().all(|f| f.equal),
        ),
        CheckOut::new("global integrals agree", "Theorem 4.5", report.pass),
    ];
    if let Some(stable) = xi_sensitivity {
        checks.push(CheckOut::new(
            "vanishing fibres are insensitive to the root of unity xi",
            "Lemma 3.30",
            stable,
        ));
    }
    Ok(CommandOutput {
        outputs: json!({
            "fibers": per_fiber,
            "sum1": rat_str(&report.sum1),
            "sum2": rat_str(&report.sum2),
            "verdict": report.pass,
        }),
        checks,
        precision_used: None,
    })
}

// --- suite -----------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    #[serde(default)]
    pub filter: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn run_suite(params: &SuiteParams) -> Result<CommandOutput, InputError> {
    use padic_stringy::suite::{run_criterion, CRITERIA};

    let seed = params.seed.unwrap_or(7);
    let selected: Vec<&str> = CRITERIA
        .iter()
        .map(|(id, _)| *id)
        .filter(|id| {
            params
                .filter
                .as_ref()
                .map(|f| id.contains(f.as_str()))
                .unwrap_or(true)
        })
        .collect();
    if selected.is_empty() {
        return Err(bad(format!(
            "filter {:?} matches no criterion",
            params.filter
        )));
    }

    // independent criteria run on a capped worker pool; assembly stays in
    // canonical order
    let threads = std::env::var("PADIC_STRINGY_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(4)
        .min(selected.len());
    let reports: Vec<padic_stringy::suite::CriterionReport> = if threads <= 1 {
        selected
            .iter()
            .map(|id| run_criterion(id, seed).expect("listed criterion"))
            .collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<padic_stringy::suite::CriterionReport>>> = selected
            .iter()
            .map(|_| std::sync::Mutex::new(None))
            .collect();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= selected.len() {
                        break;
                    }
                    let rep = run_criterion(selected[i], seed).expect("listed criterion");
                    *slots[i].lock().unwrap() = Some(rep);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("worker filled slot"))
            .collect()
    };

    let mut checks = Vec::new();
    let mut detail = Vec::new();
    for rep in &reports {
        let anchor = rep.checks.first().map(|c| c.anchor).unwrap_or("eqn:weil");
        checks.push(CheckOut::new(
            format!("criterion {}: {}", rep.index, rep.title),
            anchor,
            rep.pass,
        ));
        detail.push(json!({
            "id": rep.id,
            "index": rep.index,
            "title": rep.title,
            "pass": rep.pass,
            "checks": rep
                .checks
                .iter()
                .map(|c| json!({"name": c.name, "paper_anchor": c.anchor, "pass": c.pass}))
                .collect::<Vec<_>>(),
        }));
    }
    Ok(CommandOutput {
        outputs: json!({"seed": seed, "criteria": detail}),
        checks,
        precision_used: None,
    })
}
