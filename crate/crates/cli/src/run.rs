//! Command runners: each turns parsed flags and a spec into a [`Report`].

use crate::args::{Cli, CohomologyArgs, Coeff, Command, FormArg, FormsArgs, FormsOp, GeometryArg, HodgeArgs, Suite, Theory, VerifyArgs};
use crate::report::{CommandEcho, Report, Table};
use crate::spec::{format_rational, parse_rational, parse_spec, AlgebraSpec, Caps, SpecError};
use infty_core::cycliccomplex::{
    connes_window, cyclic_summand_window, cyclic_window, hochschild_column, normalised_cyclic_les, normalised_cyclic_window,
    periodicity_les, tsygan_strip, tsygan_window, LesReport,
};
use infty_core::cyclicshuffle::{CyclicOperatorTable, IdentityCheck};
use infty_core::gradedspace::{enumerate_words, GradedBasis, Letter, Word, WordComb};
use infty_core::hodge::{cohomology_by_order, decompose_cyclic, decompose_hochschild, verify_decomposed_les, CyclicModel, HochschildFlavour, LesKind};
use infty_core::homcomplex::{
    bar_window, ce_window, differential_identities, harrison_window, hochschild_window, normalised_hochschild_window, Coefficients,
    ComplexWindow, Window,
};
use infty_core::inftystruct::{check_cinfty, check_unital, validate_square_zero, InftyKind, InftyStructure};
use infty_core::ncforms::{bilinear_form, FormCalculus, FormDegree, FormRep, Geometry, Substitution, VectorField};
use infty_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Debug;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("UsageError: {0}")]
    Usage(String),
    /// A precondition failure inside the engine, named `module::Variant`.
    #[error("{name}: {message}")]
    Module { name: String, message: String },
    #[error("IoError: {0}")]
    Io(String),
}

/// Wraps an engine error, naming it by module and variant path.
fn engine<E: Debug + std::fmt::Display>(module: &str, e: E) -> CliError {
    CliError::Module { name: format!("{module}::{}", variant_path(&format!("{e:?}"))), message: e.to_string() }
}

/// `Infty(NoUnitDeclared)` becomes `Infty::NoUnitDeclared`; payloads that
/// are not variants are dropped.
fn variant_path(debug: &str) -> String {
    let mut parts = Vec::new();
    let mut rest = debug;
    loop {
        let ident: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        if ident.is_empty() || !ident.starts_with(|c: char| c.is_ascii_uppercase()) {
            break;
        }
        parts.push(ident.clone());
        rest = &rest[ident.len()..];
        match rest.strip_prefix('(') {
            Some(inner) => rest = inner,
            None => break,
        }
    }
    parts.join("::")
}

fn complex_err(e: infty_core::homcomplex::ComplexError) -> CliError {
    engine("complex", e)
}

fn forms_err(e: infty_core::ncforms::FormsError) -> CliError {
    engine("ncforms", e)
}

/// Loads the algebra file named by `--spec`, runs the command and times it.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let path = cli.spec.as_ref().ok_or_else(|| CliError::Usage("--spec FILE is required".into()))?;
    let spec = parse_spec(path)?;
    run_with_spec(cli, &spec)
}

pub fn run_with_spec(cli: &Cli, spec: &AlgebraSpec) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut caps = spec.caps;
    if let Some(w) = cli.cap {
        caps.weight = w;
    }
    if let Some((lo, hi)) = cli.degrees {
        caps.degrees = [lo, hi];
    }
    let echo = CommandEcho { name: cli.command.name().into(), args: cli.command.echo_args() };
    let mut report = Report::new(echo, Some(spec), caps);
    let s = spec.structure()?;
    let window = Window::new(caps.weight, caps.degrees[0], caps.degrees[1]);
    match &cli.command {
        Command::Check => check(&s, caps, &mut report)?,
        Command::Cohomology(a) => cohomology(&s, window, a, &mut report)?,
        Command::Hodge(a) => hodge(&s, window, a, &mut report)?,
        Command::Verify(a) => verify(&s, window, a, &mut report)?,
        Command::Forms(a) => forms(&s, spec, a, &mut report)?,
    }
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn q_cell(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn check(s: &InftyStructure, caps: Caps, report: &mut Report) -> Result<(), CliError> {
    let b = s.basis();
    let mut comps = Table::new("components", &["generator", "word", "coeff", "exact"]);
    for (g, c) in s.components().iter().enumerate() {
        for (w, k) in c.iter() {
            comps.push(vec![b.name(g).into(), b.render(w).into(), q_cell(k), true.into()]);
        }
    }
    report.tables.push(comps);

    let sq = validate_square_zero(s, caps.weight);
    let mut viol = Table::new("square_zero", &["generator", "weight", "witness", "coeff", "exact"]);
    for v in &sq.violations {
        viol.push(vec![v.generator.clone().into(), v.weight.into(), b.render(&v.witness).into(), q_cell(&v.coeff), true.into()]);
    }
    report.tables.push(viol);
    let detail = match sq.violations.iter().min_by_key(|v| v.weight) {
        None => format!("m² vanishes through weight {}", caps.weight),
        Some(v) => format!(
            "first violation at weight {}: m²({}) has coefficient {} on `{}`",
            v.weight,
            v.generator,
            format_rational(&v.coeff),
            b.render(&v.witness)
        ),
    };
    report.check("square_zero", sq.pass(), detail);

    if s.kind() == InftyKind::Cinf {
        let c = check_cinfty(s).map_err(|e| engine("inftystruct", e))?;
        let detail = if c.pass() {
            "every value is a Lie element".to_string()
        } else {
            c.failures.iter().map(|(g, w)| format!("{g} at weight {w}")).collect::<Vec<_>>().join("; ")
        };
        report.check("cinfty", c.pass(), detail);
    }
    if s.unit().is_some() {
        let u = check_unital(s).map_err(|e| engine("inftystruct", e))?;
        let detail = if u.pass() {
            "unit terms are exactly ad τ − τ²∂_τ".to_string()
        } else {
            u.offending.iter().map(|(g, w)| format!("{g}: `{}`", b.render(w))).collect::<Vec<_>>().join("; ")
        };
        report.check("unital", u.pass(), detail);
    }
    Ok(())
}

fn coefficients(c: Coeff) -> Coefficients {
    match c {
        Coeff::Dual => Coefficients::Dual,
        Coeff::Adjoint => Coefficients::Adjoint,
        Coeff::Trivial => Coefficients::Trivial,
    }
}

fn cohomology(s: &InftyStructure, window: Window, a: &CohomologyArgs, report: &mut Report) -> Result<(), CliError> {
    let coeff = coefficients(a.coeff);
    let flag_misuse = |what: &str| CliError::Usage(format!("{what} does not apply to --theory {:?}", a.theory).to_lowercase());
    let dual_only = |name: &str| -> Result<(), CliError> {
        if a.coeff != Coeff::Dual {
            return Err(CliError::Usage(format!("{name} is computed with dual coefficients only")));
        }
        Ok(())
    };
    let w: ComplexWindow = match a.theory {
        Theory::Bar => {
            if a.normalised || a.j.is_some() {
                return Err(flag_misuse("--normalised/--j"));
            }
            bar_window(s, window).map_err(complex_err)?
        }
        Theory::Hochschild => match (a.normalised, a.j) {
            (true, Some(_)) => return Err(flag_misuse("--normalised with --j")),
            (true, None) => {
                dual_only("the normalised Hochschild complex")?;
                normalised_hochschild_window(s, window).map_err(complex_err)?
            }
            (false, Some(j)) => {
                dual_only("a Hochschild summand")?;
                hochschild_column(s, window, Some(j)).map_err(complex_err)?.total
            }
            (false, None) => hochschild_window(s, window, coeff).map_err(complex_err)?,
        },
        Theory::Harrison => {
            if a.normalised || a.j.is_some() {
                return Err(flag_misuse("--normalised/--j"));
            }
            harrison_window(s, window, coeff).map_err(complex_err)?
        }
        Theory::Ce => {
            if a.normalised || a.j.is_some() {
                return Err(flag_misuse("--normalised/--j"));
            }
            ce_window(s, window, coeff).map_err(complex_err)?
        }
        Theory::Cyclic => {
            dual_only("cyclic cohomology")?;
            // The j-th cyclic summand is the e(j+1) part of the coinvariants.
            match (a.normalised, a.j) {
                (true, j) => normalised_cyclic_window(s, window, j.map(|j| j + 1)).map_err(complex_err)?.total,
                (false, Some(j)) => cyclic_summand_window(s, window, j + 1).map_err(complex_err)?.total,
                (false, None) => cyclic_window(s, window).map_err(complex_err)?.total,
            }
        }
        Theory::Tsygan => {
            dual_only("cyclic cohomology")?;
            if a.normalised {
                return Err(flag_misuse("--normalised"));
            }
            match a.j {
                Some(j) => tsygan_strip(s, window, j).map_err(complex_err)?.total,
                None => tsygan_window(s, window).map_err(complex_err)?.total,
            }
        }
        Theory::Connes => {
            dual_only("cyclic cohomology")?;
            if a.j.is_some() {
                return Err(flag_misuse("--j"));
            }
            connes_window(s, window, a.normalised).map_err(complex_err)?.total
        }
    };
    emit_cohomology(&w, report)
}

fn emit_cohomology(w: &ComplexWindow, report: &mut Report) -> Result<(), CliError> {
    let rows = w.cohomology_rows().map_err(|e| engine("exactlin", e))?;
    let mut t = Table::new("cohomology", &["degree", "dim", "exact"]);
    let mut by_weight = Table::new("by_weight", &["degree", "weight", "dim", "exact"]);
    for r in &rows {
        t.push(vec![r.degree.into(), r.dim.into(), r.exact.into()]);
        if let Some(split) = cohomology_by_order(w, r.degree, 0) {
            for (weight, dim) in split {
                by_weight.push(vec![r.degree.into(), weight.into(), dim.into(), r.exact.into()]);
            }
        }
    }
    report.check("square_zero", w.square_zero(), format!("{} differentials compose to zero", w.theory));
    report.tables.push(t);
    report.tables.push(by_weight);
    Ok(())
}

fn hodge(s: &InftyStructure, window: Window, a: &HodgeArgs, report: &mut Report) -> Result<(), CliError> {
    let table = match (a.theory, a.coeff) {
        (Theory::Bar, _) => decompose_hochschild(s, window, HochschildFlavour::Bar),
        (Theory::Hochschild, Coeff::Dual) => decompose_hochschild(s, window, HochschildFlavour::Dual),
        (Theory::Hochschild, Coeff::Adjoint) => decompose_hochschild(s, window, HochschildFlavour::Adjoint),
        (Theory::Cyclic, Coeff::Dual) => decompose_cyclic(s, window, CyclicModel::Coinvariant),
        (Theory::Tsygan, Coeff::Dual) => decompose_cyclic(s, window, CyclicModel::Tsygan),
        (t, c) => {
            return Err(CliError::Usage(format!(
                "no Hodge decomposition for theory {t:?} with {c:?} coefficients; use bar, hochschild (dual|adjoint), cyclic or tsygan"
            )
            .to_lowercase()))
        }
    }
    .map_err(complex_err)?;
    let (jlo, jhi) = a.j.unwrap_or((0, usize::MAX));
    let mut t = Table::new("hodge", &["degree", "order", "j", "dim", "exact"]);
    for r in table.rows.iter().filter(|r| (jlo..=jhi).contains(&r.j)) {
        t.push(vec![r.degree.into(), r.order.map(Value::from).unwrap_or(Value::Null), r.j.into(), r.dim.into(), r.exact.into()]);
    }
    report.tables.push(t);
    let mismatches = table.mismatches();
    report.check(
        "summands_add_up",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "Σ_j dim H_(j) = dim H in every weight-complete degree".to_string()
        } else {
            format!("sums differ in degrees {mismatches:?}")
        },
    );
    report.check("block_diagonal", table.block_diagonal, "no differential entry joins two summands");
    report.check("spans_ambient", table.spans_ambient, "eigenbases span every cell");
    Ok(())
}

fn verify(s: &InftyStructure, window: Window, a: &VerifyArgs, report: &mut Report) -> Result<(), CliError> {
    let calc = FormCalculus::new(s.basis().clone());
    let cap = window.cap;
    match a.suite {
        Suite::Identities => verify_identities(s, cap, report),
        Suite::Cartan => verify_cartan(&calc, cap, a.seed, report),
        Suite::Les => verify_les(s, window, report),
        Suite::Poincare => verify_poincare(&calc, cap, report),
        Suite::Zeta => verify_zeta(&calc, cap, report),
    }
}

/// Highest weight the operator suites are run at; the spaces grow like
/// `r^n` in the number of letters.
const SUITE_WEIGHT: usize = 6;

fn verify_identities(s: &InftyStructure, cap: usize, report: &mut Report) -> Result<(), CliError> {
    let top = cap.min(SUITE_WEIGHT);
    let table = CyclicOperatorTable::new(s.basis());
    let mut rows: Vec<(&str, IdentityCheck)> = Vec::new();
    for n in 1..=top {
        let checks = table.check_identities(n).map_err(|e| engine("cyclicshuffle", e))?;
        rows.extend(checks.into_iter().map(|c| ("spectral", c)));
    }
    let shuffle = s.kind() == InftyKind::Cinf;
    let diff = differential_identities(s, top, shuffle).map_err(complex_err)?;
    rows.extend(diff.into_iter().map(|c| ("differential", c)));
    let mut t = Table::new("identities", &["family", "identity", "weight", "holds", "exact"]);
    let mut by_name: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (family, c) in &rows {
        t.push(vec![(*family).into(), c.name.into(), c.weight.into(), c.holds.into(), true.into()]);
        let failing = by_name.entry((family, c.name)).or_default();
        if !c.holds {
            failing.push(c.weight);
        }
    }
    report.tables.push(t);
    for ((family, name), failing) in by_name {
        let detail = if failing.is_empty() { format!("holds at weights 1..={top}") } else { format!("fails at weights {failing:?}") };
        report.check(format!("{family}: {name}"), failing.is_empty(), detail);
    }
    Ok(())
}

/// A random field of the given order whose values have degree `|l| + shift`,
/// with the shift drawn among those leaving some value nonzero.
fn random_field(calc: &FormCalculus, g: Geometry, order: usize, rng: &mut ChaCha8Rng) -> Result<VectorField, CliError> {
    let b = calc.basis();
    let words = enumerate_words(b, order + 1, None);
    let mut shifts: Vec<i64> = Vec::new();
    for l in 0..b.len() {
        for w in &words {
            let s = b.word_degree(w) - b.degree(l as Letter);
            if !shifts.contains(&s) {
                shifts.push(s);
            }
        }
    }
    shifts.sort_unstable();
    let shift = if shifts.is_empty() { 0 } else { shifts[rng.gen_range(0..shifts.len())] };
    let values = (0..b.len())
        .map(|l| {
            let target = b.degree(l as Letter) + shift;
            let mut v = WordComb::zero();
            for w in words.iter().filter(|w| b.word_degree(w) == target) {
                v.add_term(w.clone(), Rational::from_integer(rng.gen_range(-2i64..=2).into()));
            }
            v
        })
        .collect();
    calc.project_field(g, &VectorField { degree: shift, values }).map_err(forms_err)
}

const GEOMETRIES: [Geometry; 3] = [Geometry::Ass, Geometry::Com, Geometry::Lie];

fn geometry_name(g: Geometry) -> &'static str {
    match g {
        Geometry::Ass => "ass",
        Geometry::Com => "com",
        Geometry::Lie => "lie",
    }
}

fn verify_cartan(calc: &FormCalculus, cap: usize, seed: u64, report: &mut Report) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = calc.basis();
    let max_weight = cap.min(3);
    let mut t = Table::new(
        "cartan",
        &["geometry", "xi_order", "gamma_order", "identity", "form_degree", "checked", "failures", "exact"],
    );
    for g in GEOMETRIES {
        let mut failing = Vec::new();
        for (xo, go) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            let xi = random_field(calc, g, xo, &mut rng)?;
            let gamma = random_field(calc, g, go, &mut rng)?;
            let higher = random_field(calc, g, 1, &mut rng)?;
            // Keep only the degree-preserving part so that φ is unipotent.
            let values = if higher.degree == 0 { higher.values } else { vec![WordComb::zero(); b.len()] };
            let phi = Substitution::unipotent(b, values).map_err(forms_err)?;
            for c in calc.cartan_suite(g, &xi, &gamma, &phi, max_weight).map_err(forms_err)? {
                if !c.pass() {
                    failing.push(format!("{} (form degree {}, orders {xo},{go})", c.identity, c.form_degree));
                }
                t.push(vec![
                    geometry_name(g).into(),
                    xo.into(),
                    go.into(),
                    c.identity.clone().into(),
                    c.form_degree.into(),
                    c.checked.into(),
                    c.failures.into(),
                    true.into(),
                ]);
            }
        }
        let detail = if failing.is_empty() { format!("all identities hold up to weight {max_weight}") } else { failing.join("; ") };
        report.check(format!("cartan {}", geometry_name(g)), failing.is_empty(), detail);
    }
    report.tables.push(t);
    Ok(())
}

fn les_rows(t: &mut Table, r: &LesReport) {
    for n in &r.nodes {
        t.push(vec![
            r.name.clone().into(),
            n.label.clone().into(),
            n.degree.into(),
            n.dim.into(),
            n.rank_in.into(),
            n.rank_out.into(),
            n.exact().into(),
            n.complete.into(),
        ]);
    }
}

fn verify_les(s: &InftyStructure, window: Window, report: &mut Report) -> Result<(), CliError> {
    let mut t = Table::new("les", &["sequence", "node", "degree", "dim", "rank_in", "rank_out", "holds", "exact"]);
    let mut record = |name: &str, result: Result<Vec<LesReport>, infty_core::homcomplex::ComplexError>, report: &mut Report| match result {
        Ok(reports) => {
            let bad: Vec<String> = reports
                .iter()
                .flat_map(|r| r.nodes.iter().filter(|n| n.complete && !n.exact()).map(move |n| format!("{}: {}", r.name, n.label)))
                .collect();
            for r in &reports {
                les_rows(&mut t, r);
            }
            // Truncated nodes cannot be judged; they stay in the table with
            // `exact = false`.
            let complete = reports.iter().flat_map(|r| &r.nodes).filter(|n| n.complete).count();
            let pass = bad.is_empty() && complete > 0;
            let detail = if !bad.is_empty() {
                bad.join("; ")
            } else if complete == 0 {
                "no node is complete inside the window".to_string()
            } else {
                format!("{} sequence(s) exact at all {complete} complete nodes", reports.len())
            };
            report.check(name, pass, detail);
        }
        Err(e) => {
            let err = complex_err(e);
            report.check(name, true, format!("skipped: {err}"));
        }
    };
    record("periodicity", periodicity_les(s, window, None).map(|r| vec![r]), report);
    record("periodicity by summand", verify_decomposed_les(s, window, LesKind::Periodicity), report);
    record("harrison", verify_decomposed_les(s, window, LesKind::Harrison), report);
    record("normalised", normalised_cyclic_les(s, window, None).map(|r| vec![r]), report);
    record("normalised by summand", verify_decomposed_les(s, window, LesKind::Normalised), report);
    report.tables.push(t);
    Ok(())
}

fn verify_poincare(calc: &FormCalculus, cap: usize, report: &mut Report) -> Result<(), CliError> {
    let top = cap.min(SUITE_WEIGHT);
    let mut t = Table::new(
        "poincare",
        &["geometry", "weight", "dim0", "dim1", "rank_d0", "rank_contracted_d1", "h0", "h1", "euler_scales", "holds", "exact"],
    );
    for g in GEOMETRIES {
        let slices = calc.poincare(g, top).map_err(forms_err)?;
        let bad: Vec<usize> = slices.iter().filter(|p| !p.pass()).map(|p| p.weight).collect();
        for p in &slices {
            t.push(vec![
                geometry_name(g).into(),
                p.weight.into(),
                p.dim0.into(),
                p.dim1.into(),
                p.rank_d0.into(),
                p.rank_contracted_d1.into(),
                p.h0.into(),
                p.h1.into(),
                p.euler_scales.into(),
                p.pass().into(),
                true.into(),
            ]);
        }
        let detail = if bad.is_empty() { format!("acyclic through weight {top}") } else { format!("fails at weights {bad:?}") };
        report.check(format!("poincare {}", geometry_name(g)), bad.is_empty(), detail);
    }
    report.tables.push(t);
    Ok(())
}

fn verify_zeta(calc: &FormCalculus, cap: usize, report: &mut Report) -> Result<(), CliError> {
    let top = cap.saturating_sub(2).min(4);
    let mut t = Table::new(
        "zeta",
        &["geometry", "order", "degree", "closed_dim", "commutator_dim", "image_rank", "image_inside", "holds", "exact"],
    );
    for g in GEOMETRIES {
        let slices = calc.zeta_slices(g, top).map_err(forms_err)?;
        let bad: Vec<String> = slices.iter().filter(|z| !z.pass()).map(|z| format!("({}, {})", z.order, z.degree)).collect();
        for z in &slices {
            t.push(vec![
                geometry_name(g).into(),
                z.order.into(),
                z.degree.into(),
                z.closed_dim.into(),
                z.commutator_dim.into(),
                z.image_rank.into(),
                z.image_inside.into(),
                z.pass().into(),
                true.into(),
            ]);
        }
        let detail = if bad.is_empty() { format!("bijective at every slice of order ≤ {top}") } else { format!("fails at (order, degree) {}", bad.join(", ")) };
        report.check(format!("zeta {}", geometry_name(g)), bad.is_empty(), detail);
    }
    report.tables.push(t);
    comparison_table(calc, top, report)?;
    let mut bad = Vec::new();
    for n in 1..=top + 2 {
        if !calc.l_injective(n).map_err(forms_err)? {
            bad.push(n);
        }
    }
    let detail = if bad.is_empty() { format!("injective through weight {}", top + 2) } else { format!("not injective at weights {bad:?}") };
    report.check("l injective", bad.is_empty(), detail);
    Ok(())
}

fn comparison_table(calc: &FormCalculus, max_order: usize, report: &mut Report) -> Result<(), CliError> {
    let mut t = Table::new("comparison", &["identity", "order", "checked", "failures", "exact"]);
    let mut bad = BTreeMap::<String, Vec<usize>>::new();
    for c in calc.comparison_checks(max_order).map_err(forms_err)? {
        let entry = bad.entry(c.identity.clone()).or_default();
        if !c.pass() {
            entry.push(c.order);
        }
        t.push(vec![c.identity.clone().into(), c.order.into(), c.checked.into(), c.failures.into(), true.into()]);
    }
    report.tables.push(t);
    for (identity, orders) in bad {
        let detail = if orders.is_empty() { format!("holds at orders ≤ {max_order}") } else { format!("fails at orders {orders:?}") };
        report.check(identity, orders.is_empty(), detail);
    }
    Ok(())
}

/// Parses `"x y, -1/2 y x"` into a combination of words over `basis`.
pub fn parse_comb(basis: &GradedBasis, text: &str) -> Result<WordComb, CliError> {
    let mut out = WordComb::zero();
    for term in text.split(',') {
        let mut tokens: Vec<&str> = term.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(CliError::Usage(format!("empty term in `{text}`")));
        }
        let mut coeff = Rational::from_integer(1.into());
        if basis.index_of(tokens[0]).is_none() {
            coeff = parse_rational(tokens[0]).map_err(|m| CliError::Usage(format!("unknown generator or bad coefficient: {m}")))?;
            tokens.remove(0);
        }
        let letters = tokens
            .iter()
            .map(|t| basis.index_of(t).map(|i| i as Letter).ok_or_else(|| CliError::Usage(format!("unknown generator `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.add_term(Word(letters), coeff);
    }
    Ok(out)
}

fn geometry(g: GeometryArg) -> Geometry {
    match g {
        GeometryArg::Ass => Geometry::Ass,
        GeometryArg::Com => Geometry::Com,
        GeometryArg::Lie => Geometry::Lie,
    }
}

fn comb_table(name: &str, basis: &GradedBasis, x: &WordComb, one_form: bool) -> Table {
    let mut t = Table::new(name, &["word", "coeff", "exact"]);
    for (w, c) in x.iter() {
        let text = match (one_form, w.0.split_first()) {
            (true, Some((first, rest))) => {
                let head = format!("d{}", basis.name(*first as usize));
                if rest.is_empty() {
                    head
                } else {
                    format!("{head} {}", basis.render(&Word(rest.to_vec())))
                }
            }
            _ => basis.render(w),
        };
        t.push(vec![text.into(), q_cell(c), true.into()]);
    }
    t
}

/// Canonical form of user input. Com input is symmetrised; Lie input must
/// already lie in the Lie image and is rejected otherwise.
fn input_form(calc: &FormCalculus, g: Geometry, fd: FormDegree, x: &WordComb) -> Result<FormRep, CliError> {
    match g {
        Geometry::Lie => {
            let ass = calc.project(Geometry::Ass, fd, x).map_err(forms_err)?;
            calc.form(Geometry::Lie, fd, ass.payload).map_err(forms_err)
        }
        _ => calc.project(g, fd, x).map_err(forms_err),
    }
}

fn forms(s: &InftyStructure, spec: &AlgebraSpec, a: &FormsArgs, report: &mut Report) -> Result<(), CliError> {
    let b = s.basis();
    let calc = FormCalculus::new(b.clone());
    let g = geometry(a.geometry);
    let input = || -> Result<WordComb, CliError> {
        let text = a.word.as_deref().ok_or_else(|| CliError::Usage("--word is required for this operation".into()))?;
        parse_comb(b, text)
    };
    match a.op {
        FormsOp::D0 => {
            let x = input_form(&calc, g, FormDegree::Zero, &input()?)?;
            let dx = calc.d0(&x).map_err(forms_err)?;
            report.tables.push(comb_table("input", b, &x.payload, false));
            report.tables.push(comb_table("result", b, &dx.payload, true));
        }
        FormsOp::Euler => {
            let fd = match a.form {
                FormArg::Zero => FormDegree::Zero,
                FormArg::One => FormDegree::One,
            };
            let x = input_form(&calc, g, fd, &input()?)?;
            let y = calc.lie(&VectorField::euler(b), &x).map_err(forms_err)?;
            let one = fd == FormDegree::One;
            report.tables.push(comb_table("input", b, &x.payload, one));
            report.tables.push(comb_table("result", b, &y.payload, one));
            let scaled = x.weight().map(|w| x.payload.scale(&Rational::from_integer((w as i64).into())));
            let expected = scaled.unwrap_or_else(WordComb::zero);
            report.check("euler_counts_letters", y.payload == expected, "L_E multiplies a form by its number of letters");
        }
        FormsOp::Zeta => {
            let alpha = input_form(&calc, g, FormDegree::One, &input()?)?;
            let omega = calc.closed_of(&alpha).map_err(forms_err)?;
            let z = calc.zeta(&omega).map_err(forms_err)?;
            report.tables.push(comb_table("input", b, &alpha.payload, true));
            report.tables.push(comb_table("result", b, &z, false));
        }
        FormsOp::Bilinear => {
            let u = spec.v_basis();
            let omega = parse_comb(&u, a.word.as_deref().ok_or_else(|| CliError::Usage("--word is required for bilinear".into()))?)?;
            let m = bilinear_form(&u, &omega).map_err(forms_err)?;
            let dense = m.matrix.to_dense();
            let mut t = Table::new("matrix", &["row", "column", "value", "exact"]);
            for (k, row) in dense.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    t.push(vec![u.name(k).into(), u.name(l).into(), q_cell(v), true.into()]);
                }
            }
            report.tables.push(t);
            let mut summary = Table::new("summary", &["dim", "rank", "skew", "nondegenerate", "exact"]);
            summary.push(vec![u.len().into(), m.matrix.rank().into(), m.skew.into(), m.is_nondegenerate().into(), true.into()]);
            report.tables.push(summary);
        }
        FormsOp::Pj => comparison_table(&calc, a.max_order, report)?,
    }
    Ok(())
}

/// Report of a command on an in-memory spec, with the timing zeroed; the
/// form the determinism guarantee is stated in.
pub fn run_untimed(cli: &Cli, spec: &AlgebraSpec) -> Result<Report, CliError> {
    let mut r = run_with_spec(cli, spec)?;
    r.timing_ms = 0;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_paths() {
        assert_eq!(variant_path("Infty(NoUnitDeclared)"), "Infty::NoUnitDeclared");
        assert_eq!(variant_path("NotCinfty(3)"), "NotCinfty");
        assert_eq!(variant_path("EmptyWindow { lo: 2, hi: 1 }"), "EmptyWindow");
    }

    #[test]
    fn combinations_parse() {
        let b = GradedBasis::from_pairs(&[("x", 0), ("y", 1)], infty_core::gradedspace::Side::W).unwrap();
        let c = parse_comb(&b, "x y, -1/2 y x, 2 x").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.coeff(&Word(vec![1, 0])), infty_core::exactlin::q_frac(-1, 2));
        assert!(matches!(parse_comb(&b, "x z"), Err(CliError::Usage(m)) if m.contains("`z`")));
        assert!(parse_comb(&b, "x,").is_err());
    }
}
