//! Star network: `N` independent sources, `N` outer parties with inputs and
//! one central joint measurement, tested with any Bell functional.
//!
//! `E_b = Σ_{x,a} c_{a,x} p(a, b | x) − β_LHV p(b)` is non-positive for
//! every local model; `E = max_b E_b`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{digits, total_dim, Operator};
use crate::network::{conditional_states, max_entangled_sources};
use crate::objects::Measurement;
use crate::sampling::{random_orthonormal_basis, random_simplex, Seed};
use crate::scalar::{Real, Tolerances};

/// Enumeration guard for the deterministic-strategy count.
pub const LHV_GUARD: u128 = 10_000_000;

/// `Σ_{x,a} c_{a,x} p(a | x)`, coefficients stored at `x·|A| + a` with `x`
/// and `a` row-major over the parties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BellFunctionalRecord<T>",
    into = "BellFunctionalRecord<T>",
    bound = "T: Real"
)]
pub struct BellFunctional<T: Real = f64> {
    name: String,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    coefficients: Vec<T>,
    lhv: LhvSolution<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BellFunctionalRecord<T: Real> {
    #[serde(default)]
    pub name: String,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub coefficients: Vec<T>,
}

impl<T: Real> TryFrom<BellFunctionalRecord<T>> for BellFunctional<T> {
    type Error = Error;

    fn try_from(r: BellFunctionalRecord<T>) -> Result<Self> {
        BellFunctional::new(r.name, r.inputs, r.outputs, r.coefficients)
    }
}

impl<T: Real> From<BellFunctional<T>> for BellFunctionalRecord<T> {
    fn from(f: BellFunctional<T>) -> Self {
        Self {
            name: f.name,
            inputs: f.inputs,
            outputs: f.outputs,
            coefficients: f.coefficients,
        }
    }
}

/// Best deterministic strategy: `strategy[j][x_j]` is party `j`'s output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LhvSolution<T: Real = f64> {
    pub bound: T,
    pub strategy: Vec<Vec<usize>>,
}

impl<T: Real> BellFunctional<T> {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        coefficients: Vec<T>,
    ) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} input counts for {} output counts",
                inputs.len(),
                outputs.len()
            )));
        }
        if inputs.iter().chain(&outputs).any(|&k| k == 0) {
            return Err(Error::ShapeMismatch(
                "every party needs an input and an output".into(),
            ));
        }
        let n: usize = inputs.iter().product::<usize>() * outputs.iter().product::<usize>();
        if coefficients.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a scenario with {n} cells",
                coefficients.len()
            )));
        }
        if let Some(k) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        let lhv = lhv_enumerate(&inputs, &outputs, &coefficients)?;
        Ok(Self {
            name: name.into(),
            inputs,
            outputs,
            coefficients,
            lhv,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn n_x(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn n_a(&self) -> usize {
        self.outputs.iter().product()
    }

    pub fn coefficient(&self, x: usize, a: usize) -> T {
        self.coefficients[x * self.n_a() + a]
    }

    pub fn lhv_bound(&self) -> T {
        self.lhv.bound
    }

    pub fn lhv_solution(&self) -> &LhvSolution<T> {
        &self.lhv
    }

    /// Same functional with party `party`'s outputs swapped on input `input`
    /// (two-output parties only).
    pub fn relabel_outputs(&self, party: usize, input: usize) -> Result<Self> {
        if party >= self.n_parties() || input >= self.inputs[party] || self.outputs[party] != 2 {
            return Err(Error::InvalidArgument(format!(
                "cannot relabel party {party} input {input}"
            )));
        }
        let na = self.n_a();
        let mut xd = vec![0; self.n_parties()];
        let mut ad = vec![0; self.n_parties()];
        let mut c = vec![T::zero(); self.coefficients.len()];
        for x in 0..self.n_x() {
            digits(x, &self.inputs, &mut xd);
            for a in 0..na {
                digits(a, &self.outputs, &mut ad);
                if xd[party] == input {
                    ad[party] ^= 1;
                }
                let a2 = crate::linalg::compose(&ad, &self.outputs);
                c[x * na + a2] = self.coefficients[x * na + a];
            }
        }
        Self::new(
            format!("{}-relabeled", self.name),
            self.inputs.clone(),
            self.outputs.clone(),
            c,
        )
    }
}

fn lhv_enumerate<T: Real>(inputs: &[usize], outputs: &[usize], c: &[T]) -> Result<LhvSolution<T>> {
    let n = inputs.len();
    let mut total: u128 = 1;
    for (&x, &a) in inputs.iter().zip(outputs) {
        total = total.saturating_mul((a as u128).saturating_pow(x as u32));
    }
    if total > LHV_GUARD {
        return Err(Error::ScenarioTooLarge { size: total });
    }
    // Parties 0..n-1 are enumerated; the last party's best response is
    // chosen input by input.
    let outer_radix: Vec<usize> = (0..n - 1)
        .flat_map(|j| std::iter::repeat_n(outputs[j], inputs[j]))
        .collect();
    let n_outer: usize = outer_radix.iter().product();
    let nx: usize = inputs.iter().product();
    let na: usize = outputs.iter().product();
    let last = n - 1;
    let eval = |s: usize| -> (T, Vec<Vec<usize>>) {
        let mut flat = vec![0; outer_radix.len()];
        digits(s, &outer_radix, &mut flat);
        let mut strat: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut off = 0;
        for j in 0..last {
            strat.push(flat[off..off + inputs[j]].to_vec());
            off += inputs[j];
        }
        let mut scores = vec![T::zero(); inputs[last] * outputs[last]];
        let mut xd = vec![0; n];
        let mut ad = vec![0; n];
        for x in 0..nx {
            digits(x, inputs, &mut xd);
            for j in 0..last {
                ad[j] = strat[j][xd[j]];
            }
            for al in 0..outputs[last] {
                ad[last] = al;
                let a = crate::linalg::compose(&ad, outputs);
                scores[xd[last] * outputs[last] + al] += c[x * na + a];
            }
        }
        let mut value = T::zero();
        let mut choice = Vec::with_capacity(inputs[last]);
        for xl in 0..inputs[last] {
            let row = &scores[xl * outputs[last]..(xl + 1) * outputs[last]];
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            value += row[best];
            choice.push(best);
        }
        strat.push(choice);
        (value, strat)
    };
    let best = (0..n_outer).into_par_iter().map(|s| (eval(s).0, s)).reduce(
        || (T::neg_infinity(), usize::MAX),
        |a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        },
    );
    let (bound, strategy) = eval(best.1);
    Ok(LhvSolution { bound, strategy })
}

/// Exact maximum over products of deterministic local strategies.
pub fn lhv_bound<T: Real>(f: &BellFunctional<T>) -> T {
    f.lhv_bound()
}

/// CHSH in probability form: `c_{ab,xy} = (−1)^{xy + a + b}`, bound 2.
pub fn chsh<T: Real>() -> BellFunctional<T> {
    let mut c = Vec::with_capacity(16);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    c.push(if (x * y + a + b) % 2 == 0 {
                        T::one()
                    } else {
                        -T::one()
                    });
                }
            }
        }
    }
    BellFunctional::new("chsh", vec![2, 2], vec![2, 2], c).expect("CHSH is well formed")
}

/// Three-party Mermin: `⟨A_0B_0C_0⟩ − ⟨A_0B_1C_1⟩ − ⟨A_1B_0C_1⟩ − ⟨A_1B_1C_0⟩`, bound 2.
pub fn mermin<T: Real>() -> BellFunctional<T> {
    let mut c = Vec::with_capacity(64);
    for x in 0..8usize {
        let ones = x.count_ones();
        let sign = match ones {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        };
        for a in 0..8usize {
            let parity = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            c.push(T::lit(sign * parity));
        }
    }
    BellFunctional::new("mermin", vec![2, 2, 2], vec![2, 2, 2], c).expect("Mermin is well formed")
}

pub fn builtin_functional<T: Real>(name: &str) -> Result<BellFunctional<T>> {
    match name {
        "chsh" => Ok(chsh()),
        "mermin" => Ok(mermin()),
        other => Err(Error::InvalidArgument(format!(
            "unknown Bell functional {other:?}"
        ))),
    }
}

/// `p(a_1…a_N, b | x_1…x_N)` at `((b·|X| + x)·|A| + a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StarTable<T: Real = f64> {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub n_outcomes: usize,
    pub probs: Vec<T>,
}

impl<T: Real> StarTable<T> {
    pub fn n_x(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn n_a(&self) -> usize {
        self.outputs.iter().product()
    }

    pub fn p(&self, a: usize, b: usize, x: usize) -> T {
        self.probs[(b * self.n_x() + x) * self.n_a() + a]
    }

    /// `Σ_a p(a, b | x)` at `x`.
    pub fn marginal_at(&self, b: usize, x: usize) -> T {
        (0..self.n_a()).map(|a| self.p(a, b, x)).sum()
    }

    pub fn marginal(&self, b: usize) -> T {
        self.marginal_at(b, 0)
    }

    pub fn check(&self, tol: T) -> Result<()> {
        let (nx, na) = (self.n_x(), self.n_a());
        if self.probs.len() != self.n_outcomes * nx * na {
            return Err(Error::ShapeMismatch(
                "table size does not match its shape".into(),
            ));
        }
        if let Some(&p) = self
            .probs
            .iter()
            .find(|&&p| !(p >= -tol && p <= T::one() + tol))
        {
            return Err(Error::ProbabilityOutOfRange(p.as_f64()));
        }
        for x in 0..nx {
            let s: T = (0..self.n_outcomes).map(|b| self.marginal_at(b, x)).sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::InvalidModel(format!(
                    "input {x} sums to {}",
                    s.as_f64()
                )));
            }
            for b in 0..self.n_outcomes {
                if (self.marginal_at(b, x) - self.marginal(b)).abs() > tol {
                    return Err(Error::InvalidModel(format!(
                        "p(b={b}) depends on the outer inputs"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Measurements of each outer party, one per input.
pub type Settings<T> = Vec<Vec<Measurement<T>>>;

fn check_settings<T: Real>(
    settings: &Settings<T>,
    dims: &[usize],
) -> Result<(Vec<usize>, Vec<usize>)> {
    if settings.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            found: settings.len(),
        });
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (j, (party, &d)) in settings.iter().zip(dims).enumerate() {
        let k = party.first().map(|m| m.len()).unwrap_or(0);
        if party.is_empty() || party.iter().any(|m| m.len() != k || m.dims() != [d]) {
            return Err(Error::ShapeMismatch(format!(
                "party {j}: every input needs a measurement on dimension {d} with {k} outcomes"
            )));
        }
        inputs.push(party.len());
        outputs.push(k);
    }
    Ok((inputs, outputs))
}

fn effect_for<T: Real>(settings: &Settings<T>, xd: &[usize], ad: &[usize]) -> Result<Operator<T>> {
    let parts: Vec<Operator<T>> = settings
        .iter()
        .enumerate()
        .map(|(j, p)| p[xd[j]].effects()[ad[j]].clone())
        .collect();
    Operator::tensor_all(&parts)
}

/// `p(a, b | x) = Tr[(⊗_j M_{a_j|x_j}) σ_b]` with `σ_b` the outer parties'
/// conditional state.
pub fn star_quantum_correlations<T: Real>(
    bob: &Measurement<T>,
    settings: &Settings<T>,
    sources: &[Operator<T>],
    tol: &Tolerances<T>,
) -> Result<StarTable<T>> {
    let sigma = conditional_states(bob, sources, tol)?;
    let (inputs, outputs) = check_settings(settings, sigma[0].dims())?;
    let nx: usize = inputs.iter().product();
    let na: usize = outputs.iter().product();
    let n = inputs.len();
    let mut effects = Vec::with_capacity(nx * na);
    let (mut xd, mut ad) = (vec![0; n], vec![0; n]);
    for x in 0..nx {
        digits(x, &inputs, &mut xd);
        for a in 0..na {
            digits(a, &outputs, &mut ad);
            effects.push(effect_for(settings, &xd, &ad)?);
        }
    }
    let rows: Vec<Vec<T>> = sigma
        .par_iter()
        .map(|s| {
            effects
                .iter()
                .map(|e| e.trace_inner_re(s).map(|p| p.max(T::zero())))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(StarTable {
        inputs,
        outputs,
        n_outcomes: bob.len(),
        probs: rows.concat(),
    })
}

/// Local model: source `j` sends `λ_j` to outer party `j` and the centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LocalModel<T: Real = f64> {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub n_outcomes: usize,
    /// `p(λ_j)` per source.
    pub source_weights: Vec<Vec<T>>,
    /// Party `j`: `p(a_j | x_j, λ_j)` row-major over `(λ_j, x_j, a_j)`.
    pub responses: Vec<Vec<T>>,
    /// `p(b | λ_1 … λ_N)` row-major over `(λ_1, …, λ_N, b)`.
    pub central: Vec<T>,
}

impl<T: Real> LocalModel<T> {
    pub fn validate(&self, tol: T) -> Result<()> {
        let n = self.inputs.len();
        if n == 0
            || self.outputs.len() != n
            || self.source_weights.len() != n
            || self.responses.len() != n
        {
            return Err(Error::InvalidModel("party counts disagree".into()));
        }
        let is_dist = |row: &[T]| {
            row.iter().all(|&p| p >= -tol)
                && (row.iter().copied().sum::<T>() - T::one()).abs() <= tol
        };
        for j in 0..n {
            let w = &self.source_weights[j];
            if w.is_empty() || !is_dist(w) {
                return Err(Error::InvalidModel(format!("source {j} weights")));
            }
            if self.responses[j].len() != w.len() * self.inputs[j] * self.outputs[j] {
                return Err(Error::InvalidModel(format!("party {j} response size")));
            }
            if !self.responses[j].chunks(self.outputs[j]).all(is_dist) {
                return Err(Error::InvalidModel(format!(
                    "party {j} response is not a distribution"
                )));
            }
        }
        let cells: usize = self.source_weights.iter().map(|w| w.len()).product();
        if self.n_outcomes == 0
            || self.central.len() != cells * self.n_outcomes
            || !self.central.chunks(self.n_outcomes).all(is_dist)
        {
            return Err(Error::InvalidModel("central response".into()));
        }
        Ok(())
    }
}

pub fn random_local_model<T: Real, R: Rng + ?Sized>(
    inputs: &[usize],
    outputs: &[usize],
    n_outcomes: usize,
    max_hidden: usize,
    rng: &mut R,
) -> LocalModel<T> {
    let mut source_weights = Vec::new();
    let mut responses = Vec::new();
    for (&x, &a) in inputs.iter().zip(outputs) {
        let k = rng.random_range(1..=max_hidden.max(1));
        source_weights.push(random_simplex(k, rng));
        let mut r = Vec::with_capacity(k * x * a);
        for _ in 0..k * x {
            if rng.random_bool(0.5) {
                let mut det = vec![T::zero(); a];
                det[rng.random_range(0..a)] = T::one();
                r.extend(det);
            } else {
                r.extend(random_simplex::<T, _>(a, rng));
            }
        }
        responses.push(r);
    }
    let cells: usize = source_weights.iter().map(|w: &Vec<T>| w.len()).product();
    let mut central = Vec::with_capacity(cells * n_outcomes);
    for _ in 0..cells {
        central.extend(random_simplex::<T, _>(n_outcomes, rng));
    }
    LocalModel {
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        n_outcomes,
        source_weights,
        responses,
        central,
    }
}

/// `p(a, b | x) = Σ_λ Π_j p(λ_j) p(b | λ) Π_j p(a_j | x_j, λ_j)`.
pub fn local_model_correlations<T: Real>(model: &LocalModel<T>, tol: T) -> Result<StarTable<T>> {
    model.validate(tol)?;
    let n = model.inputs.len();
    let nx: usize = model.inputs.iter().product();
    let na: usize = model.outputs.iter().product();
    let hshape: Vec<usize> = model.source_weights.iter().map(|w| w.len()).collect();
    let cells: usize = hshape.iter().product();
    let nb = model.n_outcomes;
    let mut probs = vec![T::zero(); nb * nx * na];
    let (mut lam, mut xd, mut ad) = (vec![0; n], vec![0; n], vec![0; n]);
    for cell in 0..cells {
        digits(cell, &hshape, &mut lam);
        let w = (0..n).fold(T::one(), |acc, j| acc * model.source_weights[j][lam[j]]);
        for x in 0..nx {
            digits(x, &model.inputs, &mut xd);
            for a in 0..na {
                digits(a, &model.outputs, &mut ad);
                let pa = (0..n).fold(T::one(), |acc, j| {
                    let (xs, os) = (model.inputs[j], model.outputs[j]);
                    acc * model.responses[j][(lam[j] * xs + xd[j]) * os + ad[j]]
                });
                for b in 0..nb {
                    probs[(b * nx + x) * na + a] += w * model.central[cell * nb + b] * pa;
                }
            }
        }
    }
    Ok(StarTable {
        inputs: model.inputs.clone(),
        outputs: model.outputs.clone(),
        n_outcomes: nb,
        probs,
    })
}

fn check_shape<T: Real>(table: &StarTable<T>, f: &BellFunctional<T>) -> Result<()> {
    if table.inputs != f.inputs || table.outputs != f.outputs {
        return Err(Error::ShapeMismatch(format!(
            "table {:?}/{:?} vs functional {:?}/{:?}",
            table.inputs, table.outputs, f.inputs, f.outputs
        )));
    }
    Ok(())
}

/// `E_b` for every outcome.
pub fn functional_e_per_b<T: Real>(table: &StarTable<T>, f: &BellFunctional<T>) -> Result<Vec<T>> {
    check_shape(table, f)?;
    let (nx, na) = (table.n_x(), table.n_a());
    Ok((0..table.n_outcomes)
        .map(|b| {
            let mut s = T::zero();
            for x in 0..nx {
                for a in 0..na {
                    s += f.coefficient(x, a) * table.p(a, b, x);
                }
            }
            s - f.lhv_bound() * table.marginal(b)
        })
        .collect())
}

/// `max_b E_b`, lowest `b` on ties.
pub fn functional_e<T: Real>(table: &StarTable<T>, f: &BellFunctional<T>) -> Result<(T, usize)> {
    let per_b = functional_e_per_b(table, f)?;
    let mut best = (T::neg_infinity(), 0);
    for (b, v) in per_b.into_iter().enumerate() {
        if v > best.0 {
            best = (v, b);
        }
    }
    Ok(best)
}

/// `Σ_{x,a} c_{a,x} Tr[(⊗_j M_{a_j|x_j}) ρ]` on the outer parties' state.
pub fn bell_value<T: Real>(
    f: &BellFunctional<T>,
    settings: &Settings<T>,
    rho: &Operator<T>,
) -> Result<T> {
    let (inputs, outputs) = check_settings(settings, rho.dims())?;
    if inputs != f.inputs || outputs != f.outputs {
        return Err(Error::ShapeMismatch(
            "settings do not match the functional".into(),
        ));
    }
    let n = inputs.len();
    let (mut xd, mut ad) = (vec![0; n], vec![0; n]);
    let mut acc = T::zero();
    for x in 0..f.n_x() {
        digits(x, &inputs, &mut xd);
        for a in 0..f.n_a() {
            let c = f.coefficient(x, a);
            if c == T::zero() {
                continue;
            }
            digits(a, &outputs, &mut ad);
            acc += c * effect_for(settings, &xd, &ad)?.trace_inner_re(rho)?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawBudget {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawBudget {
    fn default() -> Self {
        Self {
            restarts: 200,
            max_iters: 500,
            tol: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Optimized<T: Real = f64> {
    pub value: T,
    pub settings: Settings<T>,
}

/// Projector onto the strictly positive eigenspace.
fn positive_projector<T: Real>(k: &Operator<T>) -> Result<Operator<T>> {
    let eig = k.symmetrized().hermitian_eig(T::infinity())?;
    let mut p = Operator::zeros(k.dims().to_vec())?;
    for (v, vec) in eig.values.iter().zip(&eig.vectors) {
        if *v > T::zero() {
            p = &p + &vec.projector();
        }
    }
    Ok(p)
}

fn seesaw_once<T: Real>(
    f: &BellFunctional<T>,
    rho: &Operator<T>,
    budget: &SeesawBudget,
    seed: Seed,
) -> Result<Optimized<T>> {
    let dims = rho.dims().to_vec();
    let n = dims.len();
    let mut rng = seed.rng();
    // effects[j][x] = [M_{0|x}, M_{1|x}] of party j.
    let mut effects: Vec<Vec<[Operator<T>; 2]>> = Vec::with_capacity(n);
    for (j, &d) in dims.iter().enumerate() {
        let id = Operator::identity(vec![d])?;
        let mut per_input = Vec::new();
        for _ in 0..f.inputs[j] {
            let basis = random_orthonormal_basis::<T, _>(&[d], &mut rng)?;
            let rank = rng.random_range(1..d);
            let mut p = Operator::zeros(vec![d])?;
            for v in basis.iter().take(rank) {
                p = &p + &v.projector();
            }
            let q = &id - &p;
            per_input.push([p, q]);
        }
        effects.push(per_input);
    }
    let (mut xd, mut ad) = (vec![0; n], vec![0; n]);
    let mut value = T::neg_infinity();
    for _ in 0..budget.max_iters {
        let before = value;
        for j in 0..n {
            let d = dims[j];
            let id = Operator::identity(vec![d])?;
            // Other parties' (input, output) pairs, enumerated row-major with
            // party j pinned to zero.
            let mut rx = f.inputs.clone();
            let mut ra = f.outputs.clone();
            rx[j] = 1;
            ra[j] = 1;
            let nrx: usize = rx.iter().product();
            let nra: usize = ra.iter().product();
            let mut k =
                vec![vec![Operator::zeros(vec![d])?, Operator::zeros(vec![d])?]; f.inputs[j]];
            for xo in 0..nrx {
                digits(xo, &rx, &mut xd);
                for ao in 0..nra {
                    digits(ao, &ra, &mut ad);
                    let parts: Vec<Operator<T>> = (0..n)
                        .map(|p| {
                            if p == j {
                                id.clone()
                            } else {
                                effects[p][xd[p]][ad[p]].clone()
                            }
                        })
                        .collect();
                    let reduced = Operator::tensor_all(&parts)?
                        .try_matmul(rho)?
                        .partial_trace(&[j])?;
                    for xj in 0..f.inputs[j] {
                        xd[j] = xj;
                        let x = crate::linalg::compose(&xd, &f.inputs);
                        for (aj, slot) in k[xj].iter_mut().enumerate() {
                            ad[j] = aj;
                            let c = f.coefficient(x, crate::linalg::compose(&ad, &f.outputs));
                            if c != T::zero() {
                                *slot = &*slot + &reduced.scale(c);
                            }
                        }
                    }
                    xd[j] = 0;
                    ad[j] = 0;
                }
            }
            let mut v = T::zero();
            for (x, kx) in k.iter().enumerate() {
                let p = positive_projector(&(&kx[0] - &kx[1]))?;
                let q = &id - &p;
                v += p.trace_inner_re(&kx[0])? + q.trace_inner_re(&kx[1])?;
                effects[j][x] = [p, q];
            }
            value = v;
        }
        if (value - before).abs() <= T::lit(budget.tol) {
            break;
        }
    }
    let settings: Settings<T> = effects
        .iter()
        .map(|party| {
            party
                .iter()
                .map(|[p, q]| {
                    Measurement::new(p.dims().to_vec(), vec![p.clone(), q.clone()], "setting")
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let value = bell_value(f, &settings, rho)?;
    Ok(Optimized { value, settings })
}

/// Maximizes the Bell value on `rho` over two-outcome projective settings by
/// see-saw (each party's optimal projector with the others fixed) from
/// seeded random starts. Lowest restart index wins ties.
pub fn optimize_bell_value<T: Real>(
    f: &BellFunctional<T>,
    rho: &Operator<T>,
    budget: &SeesawBudget,
) -> Result<Optimized<T>> {
    if rho.dims().len() != f.n_parties() {
        return Err(Error::DimensionMismatch {
            expected: f.n_parties(),
            found: rho.dims().len(),
        });
    }
    if f.outputs.iter().any(|&o| o != 2) {
        return Err(Error::Unsupported(
            "setting optimization covers two-output parties only".into(),
        ));
    }
    if budget.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let base = Seed::new(budget.seed);
    let runs: Vec<Result<Optimized<T>>> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| seesaw_once(f, rho, budget, base.split(r as u64)))
        .collect();
    let mut best: Option<Optimized<T>> = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "DI-certified entangled",
            Verdict::NotCertified => "not certified",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiOptions {
    pub budget: SeesawBudget,
    /// Choose outer settings separately for every central outcome.
    pub per_b_settings: bool,
    /// Accept central measurements that are not rank-one projective.
    pub allow_non_rank_one: bool,
}

impl Default for DiOptions {
    fn default() -> Self {
        Self {
            budget: SeesawBudget::default(),
            per_b_settings: true,
            allow_non_rank_one: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PerB<T: Real = f64> {
    pub b: usize,
    pub p_b: T,
    /// Bell value on the normalized conditional state.
    pub bell_value: T,
    pub e_value: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settings: Option<Settings<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiReport<T: Real = f64> {
    pub functional: String,
    pub lhv_bound: T,
    pub per_b_settings: bool,
    pub per_b: Vec<PerB<T>>,
    pub value: T,
    pub argmax_b: usize,
    pub verdict: Verdict,
}

pub const DI_MARGIN: f64 = 1e-6;

/// Optimizes the outer settings against each conditional state and reports
/// `E`. Sources default to maximally entangled pairs.
pub fn di_detect<T: Real>(
    bob: &Measurement<T>,
    f: &BellFunctional<T>,
    sources: Option<&[Operator<T>]>,
    opts: &DiOptions,
    tol: &Tolerances<T>,
) -> Result<DiReport<T>> {
    if !opts.allow_non_rank_one && !bob.is_rank_one_projective(tol.psd) {
        return Err(Error::NotCovered(
            "central measurement is not rank-one projective; pass the override to evaluate it anyway".into(),
        ));
    }
    if bob.dims().len() != f.n_parties() {
        return Err(Error::DimensionMismatch {
            expected: f.n_parties(),
            found: bob.dims().len(),
        });
    }
    let owned;
    let sources = match sources {
        Some(s) => s,
        None => {
            owned = max_entangled_sources(bob.dims())?;
            &owned
        }
    };
    let sigma = conditional_states(bob, sources, tol)?;
    let base = opts.budget.seed;
    let optimized: Vec<Option<(T, Optimized<T>)>> = sigma
        .iter()
        .enumerate()
        .map(|(b, s)| {
            let pb = s.trace().re;
            if pb <= tol.psd {
                return Ok(None);
            }
            let budget = SeesawBudget {
                seed: Seed::new(base).split(b as u64).rng().random(),
                ..opts.budget
            };
            Ok(Some((
                pb,
                optimize_bell_value(f, &s.scale(T::one() / pb), &budget)?,
            )))
        })
        .collect::<Result<_>>()?;
    let beta = f.lhv_bound();
    let mut per_b: Vec<PerB<T>> = optimized
        .iter()
        .enumerate()
        .map(|(b, o)| match o {
            Some((pb, opt)) => PerB {
                b,
                p_b: *pb,
                bell_value: opt.value,
                e_value: *pb * (opt.value - beta),
                settings: Some(opt.settings.clone()),
            },
            None => PerB {
                b,
                p_b: T::zero(),
                bell_value: T::zero(),
                e_value: T::zero(),
                settings: None,
            },
        })
        .collect();
    let argmax = |rows: &[PerB<T>]| {
        let mut best = (T::neg_infinity(), 0);
        for r in rows {
            if r.e_value > best.0 {
                best = (r.e_value, r.b);
            }
        }
        best
    };
    let (mut value, mut arg) = argmax(&per_b);
    if !opts.per_b_settings {
        // One setting set for every b: max_s max_b = max_b max_s, so the
        // argmax outcome's settings are optimal; rows are re-evaluated there.
        let shared = per_b[arg].settings.clone().expect("argmax has settings");
        for (row, s) in per_b.iter_mut().zip(&sigma) {
            if row.p_b > T::zero() {
                row.bell_value = bell_value(f, &shared, &s.scale(T::one() / row.p_b))?;
                row.e_value = row.p_b * (row.bell_value - beta);
            }
            row.settings = None;
        }
        per_b[arg].settings = Some(shared);
        (value, arg) = argmax(&per_b);
    }
    Ok(DiReport {
        functional: f.name().to_string(),
        lhv_bound: beta,
        per_b_settings: opts.per_b_settings,
        per_b,
        value,
        argmax_b: arg,
        verdict: if value > T::lit(DI_MARGIN) {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        },
    })
}

/// Total strategy count `Π_j |A_j|^{|X_j|}`.
pub fn strategy_count(inputs: &[usize], outputs: &[usize]) -> u128 {
    inputs.iter().zip(outputs).fold(1u128, |acc, (&x, &a)| {
        acc.saturating_mul((a as u128).saturating_pow(x as u32))
    })
}

/// `Σ_b` of the outer marginal state: the product of the sources' outer
/// reductions.
pub fn outer_marginal<T: Real>(sources: &[Operator<T>]) -> Result<Operator<T>> {
    let parts = sources
        .iter()
        .map(|s| s.partial_trace(&[0]))
        .collect::<Result<Vec<_>>>()?;
    let op = Operator::tensor_all(&parts)?;
    debug_assert_eq!(op.dim(), total_dim(op.dims()));
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PureVector;
    use crate::network::pure_sources;
    use crate::objects::{bell_basis, bell_states};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn small_budget() -> SeesawBudget {
        SeesawBudget {
            restarts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn chsh_bound_and_uniform() {
        let f = chsh::<f64>();
        assert_eq!(f.lhv_bound(), 2.0);
        let uniform = StarTable {
            inputs: vec![2, 2],
            outputs: vec![2, 2],
            n_outcomes: 1,
            probs: vec![0.25; 16],
        };
        let (e, _) = functional_e(&uniform, &f).unwrap();
        assert!((e + 2.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_bounds() {
        let zero =
            BellFunctional::<f64>::new("zero", vec![2, 2], vec![2, 2], vec![0.0; 16]).unwrap();
        assert_eq!(zero.lhv_bound(), 0.0);
        let single =
            BellFunctional::<f64>::new("p0", vec![2], vec![2], vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(single.lhv_bound(), 2.0);
        assert_eq!(single.lhv_solution().strategy, vec![vec![0, 0]]);
    }

    #[test]
    fn guard_rejects_large_scenarios() {
        let n = 2usize.pow(12);
        let err = BellFunctional::<f64>::new("big", vec![12, 12], vec![2, 2], vec![0.0; 144 * 4]);
        assert!(matches!(err, Err(Error::ScenarioTooLarge { .. })));
        assert_eq!(strategy_count(&[12, 12], &[2, 2]), (n * n) as u128);
    }

    #[test]
    fn relabelings_keep_bound() {
        let f = chsh::<f64>();
        for mask in 0..16 {
            let mut g = f.clone();
            for bit in 0..4 {
                if mask >> bit & 1 == 1 {
                    g = g.relabel_outputs(bit / 2, bit % 2).unwrap();
                }
            }
            assert_eq!(g.lhv_bound(), 2.0);
        }
    }

    #[test]
    fn mermin_bound() {
        assert_eq!(mermin::<f64>().lhv_bound(), 2.0);
    }

    #[test]
    fn chsh_on_phi_plus() {
        let rho = bell_states::<f64>()[0].projector();
        let opt = optimize_bell_value(&chsh(), &rho, &small_budget()).unwrap();
        assert!(
            (opt.value - 2.0 * 2f64.sqrt()).abs() < 1e-6,
            "{}",
            opt.value
        );
        let again = bell_value(&chsh(), &opt.settings, &rho).unwrap();
        assert!((again - opt.value).abs() < 1e-12);
    }

    #[test]
    fn mermin_on_ghz() {
        let rho = crate::objects::ghz::<f64>(3).unwrap().projector();
        let opt = optimize_bell_value(&mermin(), &rho, &small_budget()).unwrap();
        assert!((opt.value - 4.0).abs() < 1e-6, "{}", opt.value);
    }

    #[test]
    fn bell_basis_star_value() {
        let bm = bell_basis::<f64>();
        let opts = DiOptions {
            budget: small_budget(),
            ..Default::default()
        };
        let r = di_detect(&bm, &chsh(), None, &opts, &tol()).unwrap();
        let target = (2.0 * 2f64.sqrt() - 2.0) / 4.0;
        assert!((r.value - target).abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::Certified);
        for row in &r.per_b {
            assert!((row.e_value - target).abs() < 1e-6);
        }
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let settings = r.per_b[r.argmax_b].settings.clone().unwrap();
        let table = star_quantum_correlations(&bm, &settings, &sources, &tol()).unwrap();
        table.check(1e-9).unwrap();
        let (e, _) = functional_e(&table, &chsh()).unwrap();
        assert!((e - r.value).abs() < 1e-9);
    }

    #[test]
    fn shared_settings_mode() {
        let bm = bell_basis::<f64>();
        let opts = DiOptions {
            budget: small_budget(),
            per_b_settings: false,
            ..Default::default()
        };
        let r = di_detect(&bm, &chsh(), None, &opts, &tol()).unwrap();
        let target = (2.0 * 2f64.sqrt() - 2.0) / 4.0;
        assert!((r.value - target).abs() < 1e-6);
        assert_eq!(r.per_b.iter().filter(|p| p.settings.is_some()).count(), 1);
    }

    #[test]
    fn computational_basis_not_certified() {
        let comp = Measurement::<f64>::computational(vec![2, 2]).unwrap();
        let opts = DiOptions {
            budget: small_budget(),
            ..Default::default()
        };
        let r = di_detect(&comp, &chsh(), None, &opts, &tol()).unwrap();
        assert!(r.value <= 1e-9);
        assert_eq!(r.verdict, Verdict::NotCertified);
    }

    #[test]
    fn partial_bell_certified_by_first_two() {
        let bs = bell_states::<f64>();
        let basis = vec![
            bs[0].clone(),
            bs[1].clone(),
            PureVector::basis(vec![2, 2], 1).unwrap(),
            PureVector::basis(vec![2, 2], 2).unwrap(),
        ];
        let m = Measurement::from_basis(vec![2, 2], &basis, "partial-bell").unwrap();
        let opts = DiOptions {
            budget: small_budget(),
            ..Default::default()
        };
        let r = di_detect(&m, &chsh(), None, &opts, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert!(r.per_b[0].e_value > 1e-6 && r.per_b[1].e_value > 1e-6);
        assert!(r.per_b[2].e_value <= 1e-9 && r.per_b[3].e_value <= 1e-9);
    }

    #[test]
    fn non_rank_one_needs_override() {
        let phi = bell_states::<f64>()[0].projector();
        let rest = &Operator::identity(vec![2, 2]).unwrap() - &phi;
        let m = Measurement::new(vec![2, 2], vec![phi, rest], "coarse").unwrap();
        let opts = DiOptions {
            budget: small_budget(),
            ..Default::default()
        };
        assert!(matches!(
            di_detect(&m, &chsh(), None, &opts, &tol()),
            Err(Error::NotCovered(_))
        ));
        let opts = DiOptions {
            allow_non_rank_one: true,
            ..opts
        };
        let r = di_detect(&m, &chsh(), None, &opts, &tol()).unwrap();
        assert!(r.per_b[0].e_value > 0.2);
    }

    #[test]
    fn trivial_bob_with_product_sources() {
        let prod = PureVector::<f64>::from_real(vec![2, 2], &[0.6, 0.8, 0.0, 0.0]).unwrap();
        let sources = pure_sources(&[prod.clone(), prod]).unwrap();
        let id = Measurement::new(
            vec![2, 2],
            vec![Operator::identity(vec![2, 2]).unwrap()],
            "id",
        )
        .unwrap();
        let opts = DiOptions {
            budget: small_budget(),
            ..Default::default()
        };
        let opts = DiOptions {
            allow_non_rank_one: true,
            ..opts
        };
        let r = di_detect(&id, &chsh(), Some(&sources), &opts, &tol()).unwrap();
        assert!(r.value <= 1e-9);
        assert!((r.per_b[0].p_b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_models_respect_bound() {
        let mut rng = Seed::new(4).rng();
        let f = chsh::<f64>();
        for _ in 0..100 {
            let m = random_local_model::<f64, _>(&[2, 2], &[2, 2], 3, 4, &mut rng);
            let t = local_model_correlations(&m, 1e-9).unwrap();
            t.check(1e-9).unwrap();
            assert!(functional_e(&t, &f).unwrap().0 <= 1e-9);
        }
    }

    #[test]
    fn deterministic_local_table() {
        let m = LocalModel {
            inputs: vec![2, 2],
            outputs: vec![2, 2],
            n_outcomes: 2,
            source_weights: vec![vec![1.0], vec![1.0]],
            responses: vec![vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 1.0]],
            central: vec![0.0, 1.0],
        };
        let t = local_model_correlations(&m, 1e-12).unwrap();
        assert!(t.probs.iter().all(|&p| p == 0.0 || p == 1.0));
        assert_eq!(t.marginal(1), 1.0);
    }

    #[test]
    fn star_table_bell_marginals() {
        let bm = bell_basis::<f64>();
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let z: Measurement = Measurement::computational(vec![2]).unwrap();
        let settings = vec![vec![z.clone(), z.clone()], vec![z.clone(), z]];
        let t = star_quantum_correlations(&bm, &settings, &sources, &tol()).unwrap();
        t.check(1e-9).unwrap();
        for b in 0..4 {
            assert!((t.marginal(b) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn serde_recomputes_bound() {
        let json = serde_json::to_string(&chsh::<f64>()).unwrap();
        let back: BellFunctional = serde_json::from_str(&json).unwrap();
        assert_eq!(back.lhv_bound(), 2.0);
    }
}
