//! Worked scenarios: the current experiment and the linear gauge.

use crate::funalg::{funalg_pack, linear_pack};
use crate::kernel::{parse, Expr};
use crate::perturb::{error_expansion_pack, normal_form, perturb_pack};
use crate::rewrite::{EvalError, Session};

use super::{interpret, run_experiment, Experiment, ExperimentError, MaterialSystem};

#[derive(Clone, Debug, PartialEq)]
pub struct CurrentReport {
    /// `r i²`.
    pub output: f64,
    /// `(r⁻¹ #)^(1/2)` applied to the output: `|i|`.
    pub interpreted: f64,
    /// Why `k⁻¹ #&` does not interpret the experiment. `None` when the
    /// output is zero, since `k⁻¹ 0` folds to `0`.
    pub k_failure: Option<ExperimentError>,
}

fn p(text: &str) -> Expr {
    parse(text).expect("well-formed scenario text")
}

/// The experiment `{r #², i}` on a numeric current `i` and resistance `r`.
pub fn current_example(s: &Session, r: f64, i: f64) -> Result<CurrentReport, ExperimentError> {
    let system = MaterialSystem::state("i", vec![Expr::real(i)]);
    let m = p(&format!("{}*#^2&", Expr::real(r)));
    let ex = Experiment::new(m, system);
    let output = run_experiment(s, &ex)?[0];
    let root = p(&format!("({}^-1*#)^(1/2)&", Expr::real(r)));
    let interpreted = interpret(s, &ex, &root)?.output[0];
    let k_failure = interpret(s, &ex, &p("k^-1*#&")).err();
    Ok(CurrentReport { output, interpreted, k_failure })
}

/// One symbolic claim: the derived form and whether it matches the target.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub derived: Expr,
    pub expected: Expr,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearGaugeReport {
    /// `σ[T*_ε] = σ[T](1 − ε)`.
    pub sigma_star: Derivation,
    /// `R[T*_ε] = σ[T] Φ[T*_ε] (1 − ε)`.
    pub response: Derivation,
    /// `(R∘T*)'[0] = σ[T](dΦ[T][δ[T]] − Φ[T])`.
    pub slope: Derivation,
    /// `−Φ[T]⁻¹ #&` applied to the slope when `dΦ[T][δ[T]] = 0`.
    pub interpreted: Derivation,
    pub at_zero: Derivation,
    pub at_one: Derivation,
}

impl LinearGaugeReport {
    pub fn all_hold(&self) -> bool {
        [&self.sigma_star, &self.response, &self.slope, &self.interpreted, &self.at_zero, &self.at_one]
            .iter()
            .all(|d| d.holds)
    }
}

fn derive(s: &Session, e: &str, expected: &str) -> Result<Derivation, EvalError> {
    let derived = normal_form(s, &p(e))?;
    let expected = normal_form(s, &p(expected))?;
    Ok(Derivation { holds: derived == expected, derived, expected })
}

/// A linear gauge `σ ∈ LFs[Reals] ∩ Cst` reading an unshielded system `T`
/// with `δ[σ[T]] = −σ[T]`, and a response `R = σ Φ`.
pub fn linear_gauge_scenario(base: &Session) -> Result<LinearGaugeReport, EvalError> {
    let mut s = base.clone();
    for pack in [funalg_pack(), perturb_pack(), error_expansion_pack(), linear_pack("Reals")] {
        s.install(pack);
    }
    for fact in ["sigma in LFs[Reals]", "sigma in Cst", "T in Uns", "eps in Reals"] {
        s.assert_str(fact);
    }
    for rule in ["sigma[delta(x_)] :> delta(sigma[x])", "delta(sigma[T]) -> -sigma[T]", "R[x_] :> sigma[x]*Phi[x]"] {
        s.add_rule(&p(rule))?;
    }
    let slope_expr = "ReplaceAll[D[R[star(eps, T)], eps], eps -> 0]";
    let slope = derive(&s, slope_expr, "sigma[T]*(d[Phi][T][delta(T)] - Phi[T])")?;
    let mut flat = s.clone();
    flat.add_rule(&p("d[Phi][T][delta(T)] -> 0"))?;
    let interpreted = derive(&flat, &format!("(-Phi[T]^-1*#&)[{slope_expr}]"), "sigma[T]")?;
    Ok(LinearGaugeReport {
        sigma_star: derive(&s, "sigma[star(eps, T)]", "sigma[T]*(1 - eps)")?,
        response: derive(&s, "R[star(eps, T)]", "sigma[T]*Phi[star(eps, T)]*(1 - eps)")?,
        slope,
        interpreted,
        at_zero: derive(&s, "sigma[star(0, T)]", "sigma[T]")?,
        at_one: derive(&s, "sigma[star(1, T)]", "0")?,
    })
}
