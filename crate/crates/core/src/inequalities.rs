//! Every uncertainty relation of the suite, evaluated on a [`MomentTable`]
//! (or, for the Robertson relation, on operators applied to a grid state).

use crate::error::{Error, Result};
use crate::grid::{GridOperator, GridState};
use crate::moments::{collective_dispersions, MomentTable};
use crate::report::{Engine, InequalityReport, RelationName, RelationOutcome};

/// Default slack tolerance for exact Gaussian moments.
pub const GAUSSIAN_TOL: f64 = 1e-9;
/// Default slack tolerance for grid moments (discretization noise floor).
pub const GRID_TOL: f64 = 1e-6;
/// Relative tolerance on the equal-dispersion preparation assumption.
pub const SYMMETRIC_DISPERSION_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub hbar: f64,
    pub tol: f64,
    pub engine: Engine,
}

impl SuiteConfig {
    pub fn new(hbar: f64, tol: f64, engine: Engine) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid(format!("hbar must be > 0, got {hbar}")));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
        }
        Ok(Self { hbar, tol, engine })
    }

    pub fn gaussian(hbar: f64) -> Self {
        Self { hbar, tol: GAUSSIAN_TOL, engine: Engine::Gaussian }
    }

    pub fn grid(hbar: f64) -> Self {
        Self { hbar, tol: GRID_TOL, engine: Engine::Grid }
    }

    fn report(&self, name: RelationName, n: usize, lhs: f64, rhs: f64) -> InequalityReport {
        InequalityReport::evaluate(name, n, self.engine, lhs, rhs, self.tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Q,
    P,
}

impl Which {
    fn pick<'a>(&self, m: &'a MomentTable) -> &'a nalgebra::DMatrix<f64> {
        match self {
            Which::Q => m.cov_q(),
            Which::P => m.cov_p(),
        }
    }
}

fn require_n(m: &MomentTable, n: usize, what: &str) -> Result<()> {
    if m.n() != n {
        return Err(Error::invalid(format!("{what} needs {n} particles, table has {}", m.n())));
    }
    Ok(())
}

/// (ΔA)²(ΔB)² ≥ |⟨[A,B]⟩|²/4 with the commutator expectation evaluated as
/// ⟨ψ|ABψ⟩ − ⟨ψ|BAψ⟩ by applying the operators to the amplitudes.
pub fn robertson(
    s: &GridState,
    a: &GridOperator,
    b: &GridOperator,
    cfg: &SuiteConfig,
) -> Result<InequalityReport> {
    let hbar = cfg.hbar;
    let psi = s.amps();
    let a_psi = s.apply(a, hbar)?;
    let b_psi = s.apply(b, hbar)?;
    s.check_envelope(&a_psi)?;
    s.check_envelope(&b_psi)?;
    let spec = s.spec();
    let ab_psi = a.clone_apply(&b_psi, spec, hbar);
    let ba_psi = b.clone_apply(&a_psi, spec, hbar);
    let commutator = s.inner(psi, &ab_psi) - s.inner(psi, &ba_psi);
    let mean_a = s.inner(psi, &a_psi).re;
    let mean_b = s.inner(psi, &b_psi).re;
    let var_a = s.inner(&a_psi, &a_psi).re - mean_a * mean_a;
    let var_b = s.inner(&b_psi, &b_psi).re - mean_b * mean_b;
    let rhs = commutator.norm_sqr() / 4.0;
    Ok(cfg
        .report(RelationName::Robertson, spec.n_particles(), var_a * var_b, rhs)
        .with_sub("var_a", var_a)
        .with_sub("var_b", var_b)
        .with_sub("commutator_re", commutator.re)
        .with_sub("commutator_im", commutator.im))
}

/// (ΔQ)²(ΔP)² ≥ N²ℏ²/4 with (ΔQ)² = Σ_{i,j} C_Q(i,j).
pub fn collective_gur(m: &MomentTable, cfg: &SuiteConfig) -> InequalityReport {
    let (dq2, dp2) = collective_dispersions(m);
    let n = m.n() as f64;
    cfg.report(RelationName::CollectiveGur, m.n(), dq2 * dp2, n * n * cfg.hbar * cfg.hbar / 4.0)
        .with_sub("dq2", dq2)
        .with_sub("dp2", dp2)
}

/// The same relation assembled from the split sums
/// (Σ(ΔQ_i)² + Σ_{i≠j}C_Q(i,j))(Σ(ΔP_i)² + Σ_{i≠j}C_P(i,j)).
pub fn gur_split(m: &MomentTable, cfg: &SuiteConfig) -> InequalityReport {
    let (dq, dp) = (m.sum_var_q(), m.sum_var_p());
    let (oq, op) = (m.offdiag_sum_q(), m.offdiag_sum_p());
    let n = m.n() as f64;
    cfg.report(RelationName::GurN, m.n(), (dq + oq) * (dp + op), n * n * cfg.hbar * cfg.hbar / 4.0)
        .with_sub("diag_q", dq)
        .with_sub("diag_p", dp)
        .with_sub("offdiag_q", oq)
        .with_sub("offdiag_p", op)
}

/// Two-particle bracketed form
/// [(ΔQ₁)²/2 + (ΔQ₂)²/2 + C_Q(1,2)]·[…P…] ≥ ℏ²/4.
///
/// The product is evaluated directly; the factors are recorded rather than
/// assumed positive.
pub fn gur_two(m: &MomentTable, cfg: &SuiteConfig) -> Result<InequalityReport> {
    require_n(m, 2, "gur_two")?;
    let (fq, fp) = bracket_factors(m);
    Ok(cfg
        .report(RelationName::GurTwo, 2, fq * fp, cfg.hbar * cfg.hbar / 4.0)
        .with_sub("factor_q", fq)
        .with_sub("factor_p", fp))
}

/// The two factors of the bracketed two-particle form.
pub fn bracket_factors(m: &MomentTable) -> (f64, f64) {
    (
        (m.var_q(0) + m.var_q(1)) / 2.0 + m.cov_q()[(0, 1)],
        (m.var_p(0) + m.var_p(1)) / 2.0 + m.cov_p()[(0, 1)],
    )
}

/// |C(1,2)| ≤ (ΔX₁)²/2 + (ΔX₂)²/2, reported with
/// lhs = (ΔX₁)²/2 + (ΔX₂)²/2 − |C(1,2)| against rhs = 0.
pub fn schwarz_pair_bound(m: &MomentTable, which: Which, cfg: &SuiteConfig) -> Result<InequalityReport> {
    require_n(m, 2, "schwarz_pair_bound")?;
    let c = which.pick(m);
    let mean_var = (c[(0, 0)] + c[(1, 1)]) / 2.0;
    let qcf = c[(0, 1)];
    let name = match which {
        Which::Q => RelationName::SchwarzQTwo,
        Which::P => RelationName::SchwarzPTwo,
    };
    Ok(cfg
        .report(name, 2, mean_var - qcf.abs(), 0.0)
        .with_sub("mean_variance", mean_var)
        .with_sub("qcf", qcf))
}

/// [(ΔQ₁)² + (ΔQ₂)²]·[(ΔP₁)² + (ΔP₂)²] ≥ ℏ²/4.
pub fn gur_two_bound(m: &MomentTable, cfg: &SuiteConfig) -> Result<InequalityReport> {
    require_n(m, 2, "gur_two_bound")?;
    let (sq, sp) = (m.sum_var_q(), m.sum_var_p());
    Ok(cfg
        .report(RelationName::GurTwoBound, 2, sq * sp, cfg.hbar * cfg.hbar / 4.0)
        .with_sub("sum_var_q", sq)
        .with_sub("sum_var_p", sp))
}

/// ΔQ_iΔP_i ≥ ℏ/4 (two particles) or ℏ/8 (three), for states prepared with
/// equal single-particle dispersions.
pub fn symmetric_product_bound(m: &MomentTable, cfg: &SuiteConfig) -> Result<InequalityReport> {
    let (name, rhs) = match m.n() {
        2 => (RelationName::SymmetricTwo, cfg.hbar / 4.0),
        3 => (RelationName::SymmetricThree, cfg.hbar / 8.0),
        n => return Err(Error::invalid(format!("symmetric product bound needs 2 or 3 particles, got {n}"))),
    };
    if let Some((quad, i, j)) = m.asymmetric_pair(SYMMETRIC_DISPERSION_RTOL) {
        return Err(Error::Precondition(format!(
            "dispersions Δ{quad}_{i} and Δ{quad}_{j} differ; the bound assumes equal dispersions"
        )));
    }
    let (dq, dp) = (m.var_q(0).sqrt(), m.var_p(0).sqrt());
    Ok(cfg
        .report(name, m.n(), dq * dp, rhs)
        .with_sub("dq", dq)
        .with_sub("dp", dp)
        .with_sub("hur_reference", cfg.hbar / 2.0))
}

/// All eight sign vectors a ∈ {±1}³ in a fixed order; the four listed first
/// are (+,−,−), (−,+,−), (−,−,+), (+,+,+).
pub const SIGN_VECTORS: [[i8; 3]; 8] = [
    [1, -1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
    [1, 1, 1],
    [-1, 1, 1],
    [1, -1, 1],
    [1, 1, -1],
    [-1, -1, -1],
];

fn sign_label(a: &[i8; 3]) -> String {
    a.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// Σ(ΔX_i)² ≥ −Σ_{i≠j} a_i a_j C(i,j) for every sign vector, then the
/// combined two-sided bound −Σ(ΔX_i)² ≤ Σ_{i≠j}C(i,j) ≤ 3Σ(ΔX_i)² as two
/// reports (variants `lower` and `upper`).
pub fn schwarz_triple_bounds(m: &MomentTable, which: Which, cfg: &SuiteConfig) -> Result<Vec<InequalityReport>> {
    require_n(m, 3, "schwarz_triple_bounds")?;
    let c = which.pick(m);
    let name = match which {
        Which::Q => RelationName::SchwarzThreeQ,
        Which::P => RelationName::SchwarzThreeP,
    };
    let sum_var = c.diagonal().sum();
    let mut out = Vec::with_capacity(SIGN_VECTORS.len() + 2);
    for a in &SIGN_VECTORS {
        let mut signed = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    signed += f64::from(a[i] * a[j]) * c[(i, j)];
                }
            }
        }
        out.push(
            cfg.report(name, 3, sum_var, -signed)
                .with_variant(sign_label(a))
                .with_sub("a1", f64::from(a[0]))
                .with_sub("a2", f64::from(a[1]))
                .with_sub("a3", f64::from(a[2])),
        );
    }
    let offdiag: f64 = c.sum() - sum_var;
    out.push(
        cfg.report(name, 3, offdiag, -sum_var)
            .with_variant("lower")
            .with_sub("sum_var", sum_var)
            .with_sub("offdiag_sum", offdiag),
    );
    out.push(
        cfg.report(name, 3, 3.0 * sum_var, offdiag)
            .with_variant("upper")
            .with_sub("sum_var", sum_var)
            .with_sub("offdiag_sum", offdiag),
    );
    Ok(out)
}

/// (Σ(ΔQ_i)²)(Σ(ΔP_i)²) ≥ 9ℏ²/64.
pub fn gur_three_bound(m: &MomentTable, cfg: &SuiteConfig) -> Result<InequalityReport> {
    require_n(m, 3, "gur_three_bound")?;
    let (sq, sp) = (m.sum_var_q(), m.sum_var_p());
    Ok(cfg
        .report(RelationName::GurThreeBound, 3, sq * sp, 9.0 * cfg.hbar * cfg.hbar / 64.0)
        .with_sub("sum_var_q", sq)
        .with_sub("sum_var_p", sp))
}

fn not_applicable(name: RelationName, reason: impl Into<String>) -> RelationOutcome {
    RelationOutcome::NotApplicable { name, reason: reason.into() }
}

/// Evaluates every relation on one state, one outcome entry per applicable
/// report and an explicit `NotApplicable` entry for each skipped relation.
///
/// Robertson reports need operator application and are produced only when
/// `grid` is given: (Q₁, P₁), (Q₁, Q₂) for N ≥ 2, and the collective pair
/// (ΣQ_i, ΣP_i).
pub fn evaluate_suite(
    m: &MomentTable,
    grid: Option<&GridState>,
    cfg: &SuiteConfig,
    descriptor: &str,
) -> Result<Vec<RelationOutcome>> {
    let n = m.n();
    let mut out = Vec::new();
    let mut push = |r: InequalityReport| out.push(RelationOutcome::Evaluated(r.with_descriptor(descriptor)));

    if let Some(s) = grid {
        let mut pairs = vec![("Q1,P1", GridOperator::position(n, 0), GridOperator::momentum(n, 0))];
        if n >= 2 {
            pairs.push(("Q1,Q2", GridOperator::position(n, 0), GridOperator::position(n, 1)));
            pairs.push(("Q,P", GridOperator::collective_position(n), GridOperator::collective_momentum(n)));
        }
        for (label, a, b) in pairs {
            push(robertson(s, &a, &b, cfg)?.with_variant(label));
        }
    }
    push(collective_gur(m, cfg));
    push(gur_split(m, cfg));
    if n == 2 {
        push(gur_two(m, cfg)?);
        push(schwarz_pair_bound(m, Which::Q, cfg)?);
        push(schwarz_pair_bound(m, Which::P, cfg)?);
        push(gur_two_bound(m, cfg)?);
    }
    if n == 3 {
        for r in schwarz_triple_bounds(m, Which::Q, cfg)? {
            push(r);
        }
        for r in schwarz_triple_bounds(m, Which::P, cfg)? {
            push(r);
        }
        push(gur_three_bound(m, cfg)?);
    }
    let symmetric = match n {
        2 | 3 => match symmetric_product_bound(m, cfg) {
            Ok(r) => {
                push(r);
                None
            }
            Err(Error::Precondition(reason)) => Some(reason),
            Err(e) => return Err(e),
        },
        _ => None,
    };

    if grid.is_none() {
        out.push(not_applicable(RelationName::Robertson, "needs operator application on a grid state"));
    }
    let two_only = [
        RelationName::GurTwo,
        RelationName::SchwarzQTwo,
        RelationName::SchwarzPTwo,
        RelationName::GurTwoBound,
    ];
    let three_only = [RelationName::SchwarzThreeQ, RelationName::SchwarzThreeP, RelationName::GurThreeBound];
    if n != 2 {
        for name in two_only {
            out.push(not_applicable(name, format!("two-particle relation, state has {n}")));
        }
    }
    if n != 3 {
        for name in three_only {
            out.push(not_applicable(name, format!("three-particle relation, state has {n}")));
        }
    }
    for (name, k) in [(RelationName::SymmetricTwo, 2), (RelationName::SymmetricThree, 3)] {
        if n != k {
            out.push(not_applicable(name, format!("{k}-particle relation, state has {n}")));
        } else if let Some(reason) = &symmetric {
            out.push(not_applicable(name, reason.clone()));
        }
    }
    Ok(out)
}
