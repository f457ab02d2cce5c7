//! Variational estimators for the f_t-divergence, quantum relative entropy
//! and Petz Renyi divergence.
//!
//! One f_t estimation minimizes the loss `L(lambda, theta, beta) =
//! sum_i { t lambda_i^2 p_theta(i) + (1-t) lambda_i^2 p_beta(i) +
//! lambda_i (4 p_chi(i) - 2) }` over circuit angles by gradient descent
//! with parameter-shift gradients, the quadratic lambda step solved in
//! closed form each iteration. The divergence estimate is
//! `(1 + final loss) / t`, the final loss being the average over the last
//! few iterations. Relative entropy and Petz Renyi divergence aggregate
//! per-node estimates over a quadrature rule.
//!
//! Probabilities arrive through the [`ProbSource`] trait so the same
//! training loop drives in-process evaluation and remote devices. All
//! per-request sampling seeds are derived deterministically from the
//! config seed, which makes runs reproducible across both transports.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{param_shift_gradient_mixed, AnsatzSpec, ParamCircuit};
use crate::error::{Error, Result};
use crate::quad::{QuadratureRule, WeightKind};
use crate::sampling::{
    prob_u_dagger_basis, prob_v_basis, sample_bernoulli_each, sample_shots, swap_test_probs,
    ProbVector,
};
use crate::states::{support_contained, DensityMatrix};

/// Training configuration for one f_t estimation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtConfig {
    /// Number of gradient iterations K.
    pub iterations: usize,
    /// Initial learning rate.
    pub learning_rate: f64,
    /// Samples per probability estimate; 0 runs on exact probabilities.
    pub shots: u64,
    /// Sparse-Lambda cap: keep at most this many nonzero lambda entries
    /// (the ones with the largest |1 - 2 p_chi|). `None` keeps all.
    pub rank_cap: Option<usize>,
    pub u_ansatz: AnsatzSpec,
    pub v_ansatz: AnsatzSpec,
    pub seed: u64,
    /// Halve the learning rate when the recent loss fluctuates.
    pub adaptive_lr: bool,
    /// Length of the loss window monitored by the adaptive rule.
    pub loss_window: usize,
    /// Quadratic-regression MSE above which the rate is halved.
    pub mse_threshold: f64,
    /// The final loss is the mean over this many trailing iterations.
    pub final_average_window: usize,
    /// Independent random restarts per node; the run with the lowest final
    /// loss wins. Each run upper-bounds the infimum, so taking the minimum
    /// only tightens the estimate. 1 reproduces the plain single run.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Explicit initial angles `(theta, beta)` overriding the random draw;
    /// used by the warm-started node sweep.
    #[serde(default)]
    pub init: Option<(Vec<f64>, Vec<f64>)>,
}

fn default_restarts() -> usize {
    1
}

impl FtConfig {
    /// Reference defaults for states of the given width: K = 300,
    /// learning rate 0.1, exact probabilities.
    pub fn exact_defaults(n_qubits: usize, seed: u64) -> Self {
        Self {
            iterations: 300,
            learning_rate: 0.1,
            shots: 0,
            rank_cap: None,
            u_ansatz: AnsatzSpec::default_for(n_qubits),
            v_ansatz: AnsatzSpec::default_for(n_qubits),
            seed,
            adaptive_lr: false,
            loss_window: 20,
            mse_threshold: 2.0,
            final_average_window: 10,
            restarts: 1,
            init: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Validation(
                "iteration count must be at least 1".into(),
            ));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Validation("learning rate must be positive".into()));
        }
        if self.rank_cap == Some(0) {
            return Err(Error::Validation("rank cap must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Validation("restart count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one f_t estimation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FtResult {
    /// Estimate of D_{f_t}; equals `(1 + final loss) / t`, or 0 at t = 0.
    pub value: f64,
    pub t: f64,
    pub loss_trace: Vec<f64>,
    /// Learning rate in effect at each iteration.
    pub lr_trace: Vec<f64>,
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// What an [`EstimationReport`] aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "target")]
pub enum ReportKind {
    Relent,
    Petz {
        alpha: f64,
    },
    /// The alpha = 2 special case: a single t = 1 node, no quadrature.
    Petz2,
}

/// Aggregated output of the relative-entropy and Petz estimation runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimationReport {
    pub kind: ReportKind,
    pub per_node: Vec<FtResult>,
    /// Rule used to aggregate; absent for the alpha = 2 path.
    pub rule: Option<QuadratureRule>,
    /// Estimated Q_alpha for the Petz kinds.
    pub quasi: Option<f64>,
    /// The divergence estimate in bits.
    pub aggregate: f64,
}

/// Loss of the variational problem at fixed probabilities.
pub fn loss(lambda: &[f64], p_theta: &[f64], p_beta: &[f64], p_chi: &[f64], t: f64) -> f64 {
    lambda
        .iter()
        .zip(p_theta)
        .zip(p_beta)
        .zip(p_chi)
        .map(|(((&l, &pt), &pb), &pc)| {
            t * l * l * pt + (1.0 - t) * l * l * pb + l * (4.0 * pc - 2.0)
        })
        .sum()
}

/// Closed-form per-index minimizer of the quadratic loss, clamped at 0:
/// `lambda_i = max(0, (1 - 2 p_chi(i)) / (t p_theta(i) + (1-t) p_beta(i)))`.
/// A vanishing denominator means the direction lies outside both supports
/// and the entry is set to 0.
pub fn lambda_opt(p_theta: &[f64], p_beta: &[f64], p_chi: &[f64], t: f64) -> Vec<f64> {
    p_theta
        .iter()
        .zip(p_beta)
        .zip(p_chi)
        .map(|((&pt, &pb), &pc)| {
            let denom = t * pt + (1.0 - t) * pb;
            if denom <= 0.0 {
                0.0
            } else {
                ((1.0 - 2.0 * pc) / denom).max(0.0)
            }
        })
        .collect()
}

/// Keeps the `cap` entries with the largest `|1 - 2 p_chi|`, zeroing the
/// rest of the lambda vector.
fn apply_rank_cap(lambda: &mut [f64], p_chi: &[f64], cap: usize) {
    if cap >= lambda.len() {
        return;
    }
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&i, &j| {
        let a = (1.0 - 2.0 * p_chi[i]).abs();
        let b = (1.0 - 2.0 * p_chi[j]).abs();
        b.partial_cmp(&a).unwrap()
    });
    for &i in &order[cap..] {
        lambda[i] = 0.0;
    }
}

/// Halves the rate when a quadratic fit of the recent loss window leaves
/// mean squared residual above the threshold; otherwise returns it as is.
pub fn adaptive_lr_update(history: &[f64], lr: f64, window: usize, mse_threshold: f64) -> f64 {
    if history.len() < window {
        return lr;
    }
    let tail = &history[history.len() - window..];
    if quadratic_fit_mse(tail) > mse_threshold {
        lr / 2.0
    } else {
        lr
    }
}

/// Mean squared residual of the least-squares quadratic through the points
/// `(k, y[k])`.
fn quadratic_fit_mse(y: &[f64]) -> f64 {
    let n = y.len();
    // Normal equations for c0 + c1 x + c2 x^2 over x = 0..n.
    let mut s = [0.0f64; 5];
    let mut b = [0.0f64; 3];
    for (k, &yk) in y.iter().enumerate() {
        let x = k as f64;
        let mut xp = 1.0;
        for sj in &mut s {
            *sj += xp;
            xp *= x;
        }
        b[0] += yk;
        b[1] += yk * x;
        b[2] += yk * x * x;
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let c = solve3(a, b);
    let mse: f64 = y
        .iter()
        .enumerate()
        .map(|(k, &yk)| {
            let x = k as f64;
            let fit = c[0] + c[1] * x + c[2] * x * x;
            (yk - fit) * (yk - fit)
        })
        .sum();
    mse / n as f64
}

#[allow(clippy::needless_range_loop)] // rows of `a` are borrowed in pairs
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for (ak, xk) in a[col].iter().zip(&x).skip(col + 1) {
            acc -= ak * xk;
        }
        x[col] = acc / a[col][col];
    }
    x
}

/// Deterministic stream of per-request seeds (splitmix64).
#[derive(Clone, Debug)]
pub struct SeedStream {
    state: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_seed(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Derives the seed for quadrature node `j` from a master seed.
pub fn node_seed(master: u64, node_index: usize) -> u64 {
    let mut s = SeedStream::new(master ^ (node_index as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    s.next_seed()
}

/// Supplier of the three probability families.
///
/// Implementations must evaluate the exact distributions and, when
/// `shots > 0`, sample them with [`sample_shots`] under the given seed, so
/// that any two transports produce bit-identical numbers for the same
/// request stream.
pub trait ProbSource {
    /// Hilbert-space dimension of the hosted states.
    fn dim(&self) -> usize;

    fn v_basis(
        &mut self,
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector>;

    fn u_dagger_basis(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector>;

    fn swap_test(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector>;

    /// The three families at one parameter point. Seeds are assigned by the
    /// caller in family order (theta, beta, chi); implementations may serve
    /// the requests concurrently.
    fn triple(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seeds: [u64; 3],
    ) -> Result<(ProbVector, ProbVector, ProbVector)> {
        let pt = self.u_dagger_basis(u, theta, shots, seeds[0])?;
        let pb = self.v_basis(v, beta, shots, seeds[1])?;
        let pc = self.swap_test(u, theta, v, beta, shots, seeds[2])?;
        Ok((pt, pb, pc))
    }
}

/// In-process probability source holding both states.
pub struct InProcessSource {
    rho: DensityMatrix,
    sigma: DensityMatrix,
}

impl InProcessSource {
    pub fn new(rho: DensityMatrix, sigma: DensityMatrix) -> Self {
        Self { rho, sigma }
    }
}

fn maybe_sample(p: ProbVector, shots: u64, seed: u64) -> Result<ProbVector> {
    if shots == 0 {
        Ok(p)
    } else {
        sample_shots(&p, shots, seed)
    }
}

impl ProbSource for InProcessSource {
    fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn v_basis(
        &mut self,
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector> {
        maybe_sample(prob_v_basis(&self.rho, v, beta)?, shots, seed)
    }

    fn u_dagger_basis(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector> {
        maybe_sample(prob_u_dagger_basis(&self.sigma, u, theta)?, shots, seed)
    }

    fn swap_test(
        &mut self,
        u: &ParamCircuit,
        theta: &[f64],
        v: &ParamCircuit,
        beta: &[f64],
        shots: u64,
        seed: u64,
    ) -> Result<ProbVector> {
        let exact = swap_test_probs(&self.rho, u, theta, v, beta)?;
        if shots == 0 {
            Ok(exact)
        } else {
            // One ancilla measurement per basis index: independent binomials.
            sample_bernoulli_each(&exact, shots, seed)
        }
    }
}

/// One f_t estimation against an arbitrary probability source. With
/// `restarts > 1` the training runs from several seeded initializations and
/// the lowest final loss wins.
pub fn estimate_ft_with(
    source: &mut dyn ProbSource,
    t: f64,
    config: &FtConfig,
) -> Result<FtResult> {
    config.validate()?;
    if config.restarts == 1 {
        return estimate_ft_single(source, t, config);
    }
    let mut restart_seeds = SeedStream::new(config.seed ^ 0x5851_F42D_4C95_7F2D);
    let mut best: Option<FtResult> = None;
    for _ in 0..config.restarts {
        let run_config = FtConfig {
            seed: restart_seeds.next_seed(),
            restarts: 1,
            ..config.clone()
        };
        let candidate = estimate_ft_single(source, t, &run_config)?;
        let better = match &best {
            None => true,
            Some(b) => candidate.value < b.value,
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart ran"))
}

fn estimate_ft_single(source: &mut dyn ProbSource, t: f64, config: &FtConfig) -> Result<FtResult> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Validation(format!("t must lie in [0, 1], got {t}")));
    }
    if t == 0.0 {
        return Ok(FtResult {
            value: 0.0,
            t,
            loss_trace: Vec::new(),
            lr_trace: Vec::new(),
            theta: Vec::new(),
            beta: Vec::new(),
            lambda: Vec::new(),
        });
    }

    let u = config.u_ansatz.build();
    let v = config.v_ansatz.build();
    let dim = source.dim();
    if u.dim() != dim || v.dim() != dim {
        return Err(Error::DimensionMismatch(
            "ansatz width does not match the state dimension".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut theta, mut beta) = match &config.init {
        Some((theta0, beta0)) => {
            if theta0.len() != u.n_params || beta0.len() != v.n_params {
                return Err(Error::Validation(
                    "init vector lengths do not match ansatz".into(),
                ));
            }
            (theta0.clone(), beta0.clone())
        }
        None => (
            (0..u.n_params)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect(),
            (0..v.n_params)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect(),
        ),
    };
    let mut seeds = SeedStream::new(config.seed);

    let mut lr = config.learning_rate;
    let mut loss_trace = Vec::with_capacity(config.iterations);
    let mut lr_trace = Vec::with_capacity(config.iterations);
    // Window monitored by the adaptive rule; cleared after each halving so
    // one burst of fluctuation triggers at most one halving per window.
    let mut monitor: Vec<f64> = Vec::new();
    let mut lambda = vec![0.0; dim];

    for iteration in 0..config.iterations {
        let shot_seeds = [seeds.next_seed(), seeds.next_seed(), seeds.next_seed()];
        let (pt, pb, pc) = source.triple(&u, &theta, &v, &beta, config.shots, shot_seeds)?;
        lambda = lambda_opt(&pt.probs, &pb.probs, &pc.probs, t);
        if let Some(cap) = config.rank_cap {
            apply_rank_cap(&mut lambda, &pc.probs, cap);
        }
        let current = loss(&lambda, &pt.probs, &pb.probs, &pc.probs, t);
        if !current.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }
        loss_trace.push(current);
        monitor.push(current);

        if config.adaptive_lr {
            let next = adaptive_lr_update(&monitor, lr, config.loss_window, config.mse_threshold);
            if next < lr {
                monitor.clear();
            }
            lr = next;
        }
        lr_trace.push(lr);

        // Parameter-shift gradients of the loss at fixed lambda. Each
        // shifted evaluation samples all three families afresh.
        let dead_zone = lambda.iter().all(|&l| l == 0.0);
        let mut joint = theta.clone();
        joint.extend_from_slice(&beta);
        let q = theta.len();
        let mut eval_err = None;
        let grad = param_shift_gradient_mixed(
            |params: &[f64]| {
                let shot_seeds = [seeds.next_seed(), seeds.next_seed(), seeds.next_seed()];
                match source.triple(&u, &params[..q], &v, &params[q..], config.shots, shot_seeds) {
                    Ok((pt, pb, pc)) => {
                        if dead_zone {
                            // Every lambda is clamped at zero, so the
                            // fixed-lambda loss is identically zero and
                            // carries no signal; re-optimizing lambda at
                            // the shifted point restores a descent
                            // direction out of the clamped region.
                            let mut lam = lambda_opt(&pt.probs, &pb.probs, &pc.probs, t);
                            if let Some(cap) = config.rank_cap {
                                apply_rank_cap(&mut lam, &pc.probs, cap);
                            }
                            loss(&lam, &pt.probs, &pb.probs, &pc.probs, t)
                        } else {
                            loss(&lambda, &pt.probs, &pb.probs, &pc.probs, t)
                        }
                    }
                    Err(e) => {
                        eval_err = Some(e);
                        f64::NAN
                    }
                }
            },
            &joint,
        );
        if let Some(e) = eval_err {
            return Err(e);
        }
        for (x, g) in theta.iter_mut().zip(&grad[..q]) {
            *x -= lr * g;
        }
        for (x, g) in beta.iter_mut().zip(&grad[q..]) {
            *x -= lr * g;
        }
    }

    let window = config.final_average_window.max(1).min(loss_trace.len());
    let final_loss: f64 =
        loss_trace[loss_trace.len() - window..].iter().sum::<f64>() / window as f64;
    Ok(FtResult {
        value: (1.0 + final_loss) / t,
        t,
        loss_trace,
        lr_trace,
        theta,
        beta,
        lambda,
    })
}

/// One f_t estimation on in-process states, checking support containment.
pub fn estimate_ft(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
    config: &FtConfig,
) -> Result<FtResult> {
    check_supports(rho, sigma)?;
    let mut source = InProcessSource::new(rho.clone(), sigma.clone());
    estimate_ft_with(&mut source, t, config)
}

fn check_supports(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if !support_contained(rho, sigma)? {
        return Err(Error::Domain(
            "supp(rho) must be contained in supp(sigma) for a finite divergence".into(),
        ));
    }
    Ok(())
}

/// Runs one f_t estimation per node of a rule, with per-node seeds derived
/// from the config seed.
///
/// Nodes are processed in descending t (a continuation sweep): each node
/// competes a run warm-started from the previous node's angles against the
/// configured fresh restarts and keeps the lower final loss. Every run
/// upper-bounds the node's infimum, so the selection only tightens the
/// estimate; warm starting exploits the continuity of the optimizer in t,
/// which stabilizes the weakly-curved small-t landscapes.
fn per_node_results<S>(
    make_source: &S,
    rule: &QuadratureRule,
    config: &FtConfig,
) -> Result<Vec<FtResult>>
where
    S: Fn() -> Box<dyn ProbSource + Send> + Sync,
{
    let mut descending: Vec<usize> = (0..rule.nodes.len()).collect();
    descending.sort_by(|&a, &b| rule.nodes[b].partial_cmp(&rule.nodes[a]).unwrap());

    struct Warm {
        theta: Vec<f64>,
        beta: Vec<f64>,
        lr: f64,
    }

    let mut results: Vec<Option<FtResult>> = vec![None; rule.nodes.len()];
    let run_node = |j: usize, warm: Option<&Warm>| -> Result<FtResult> {
        let t = rule.nodes[j].clamp(0.0, 1.0);
        // Warm runs continue at the neighbor's annealed rate; a fresh 0.1
        // step on a steep landscape would throw the good start away.
        let node_config = FtConfig {
            seed: node_seed(config.seed, j),
            init: warm.map(|w| (w.theta.clone(), w.beta.clone())),
            learning_rate: warm.map_or(config.learning_rate, |w| w.lr.min(config.learning_rate)),
            restarts: if warm.is_some() { 1 } else { config.restarts },
            ..config.clone()
        };
        let mut source = make_source();
        estimate_ft_with(source.as_mut(), t, &node_config)
    };
    let warm_of = |r: &FtResult| Warm {
        theta: r.theta.clone(),
        beta: r.beta.clone(),
        lr: r.lr_trace.last().copied().unwrap_or(config.learning_rate),
    };

    // Descending pass: fresh restarts plus a candidate warm-started from
    // the neighbor above in t.
    let mut warm: Option<Warm> = None;
    for &j in &descending {
        let mut best = run_node(j, None)?;
        if warm.is_some() {
            let candidate = run_node(j, warm.as_ref())?;
            if candidate.value < best.value {
                best = candidate;
            }
        }
        if rule.nodes[j] > 0.0 {
            warm = Some(warm_of(&best));
        }
        results[j] = Some(best);
    }

    // Ascending refinement: the gentle small-t landscapes converge tightly,
    // so carrying their angles up the chain polishes the steep nodes.
    let mut warm: Option<Warm> = None;
    for &j in descending.iter().rev() {
        if warm.is_some() {
            let candidate = run_node(j, warm.as_ref())?;
            if candidate.value < results[j].as_ref().expect("first pass ran").value {
                results[j] = Some(candidate);
            }
        }
        let best = results[j].as_ref().expect("first pass ran");
        if rule.nodes[j] > 0.0 {
            warm = Some(warm_of(best));
        }
    }
    Ok(results
        .into_iter()
        .map(|r| r.expect("every node visited"))
        .collect())
}

fn aggregate_relent(rule: &QuadratureRule, per_node: &[FtResult]) -> f64 {
    rule.weights
        .iter()
        .zip(per_node)
        .map(|(&w, r)| -w / std::f64::consts::LN_2 * r.value)
        .sum()
}

fn aggregate_quasi(rule: &QuadratureRule, alpha: f64, per_node: &[FtResult]) -> f64 {
    let s: f64 = rule
        .weights
        .iter()
        .zip(per_node)
        .map(|(&w, r)| w * r.value)
        .sum();
    1.0 + (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI * s
}

/// Relative-entropy estimation over a uniform rule: one f_t run per node,
/// aggregated as `-sum_j (w_j / ln 2) value_j`.
pub fn estimate_relative_entropy_with<S>(
    make_source: S,
    rule: &QuadratureRule,
    config: &FtConfig,
) -> Result<EstimationReport>
where
    S: Fn() -> Box<dyn ProbSource + Send> + Sync,
{
    if rule.weight_kind != WeightKind::Uniform {
        return Err(Error::Validation(
            "relative-entropy estimation needs a uniform-weight rule".into(),
        ));
    }
    let per_node = per_node_results(&make_source, rule, config)?;
    let aggregate = aggregate_relent(rule, &per_node);
    Ok(EstimationReport {
        kind: ReportKind::Relent,
        per_node,
        rule: Some(rule.clone()),
        quasi: None,
        aggregate,
    })
}

pub fn estimate_relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    config: &FtConfig,
    rule: &QuadratureRule,
) -> Result<EstimationReport> {
    check_supports(rho, sigma)?;
    let (rho, sigma) = (rho.clone(), sigma.clone());
    estimate_relative_entropy_with(
        move || {
            Box::new(InProcessSource::new(rho.clone(), sigma.clone())) as Box<dyn ProbSource + Send>
        },
        rule,
        config,
    )
}

/// Petz Renyi estimation. For `alpha != 2` the rule must be the Jacobi
/// rule of the same alpha; `alpha = 2` runs the single-node `t = 1` path
/// with `Q_2 = 1 - D_{f_1}` and needs no rule.
pub fn estimate_petz_with<S>(
    make_source: S,
    alpha: f64,
    rule: Option<&QuadratureRule>,
    config: &FtConfig,
) -> Result<EstimationReport>
where
    S: Fn() -> Box<dyn ProbSource + Send> + Sync,
{
    if alpha == 2.0 {
        let mut source = make_source();
        let node = estimate_ft_with(source.as_mut(), 1.0, config)?;
        let quasi = 1.0 - node.value;
        if quasi <= 0.0 {
            return Err(Error::Estimation(format!(
                "estimated Q_2 = {quasi} is not positive; log undefined"
            )));
        }
        return Ok(EstimationReport {
            kind: ReportKind::Petz2,
            per_node: vec![node],
            rule: None,
            quasi: Some(quasi),
            aggregate: quasi.log2(),
        });
    }
    if !(alpha > 0.0 && alpha < 2.0 && (alpha - 1.0).abs() > f64::EPSILON) {
        return Err(Error::Validation(format!(
            "alpha must lie in (0,1) or (1,2], got {alpha}"
        )));
    }
    let rule =
        rule.ok_or_else(|| Error::Validation("Petz estimation needs a Jacobi rule".into()))?;
    match rule.weight_kind {
        WeightKind::Jacobi { alpha: a } if (a - alpha).abs() <= 1e-12 => {}
        _ => {
            return Err(Error::Validation(
                "rule weight must be the Jacobi weight of the same alpha".into(),
            ))
        }
    }
    let per_node = per_node_results(&make_source, rule, config)?;
    let quasi = aggregate_quasi(rule, alpha, &per_node);
    if quasi <= 0.0 {
        return Err(Error::Estimation(format!(
            "estimated Q_alpha = {quasi} is not positive; log undefined"
        )));
    }
    Ok(EstimationReport {
        kind: ReportKind::Petz { alpha },
        per_node,
        rule: Some(rule.clone()),
        quasi: Some(quasi),
        aggregate: quasi.log2() / (alpha - 1.0),
    })
}

pub fn estimate_petz(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
    config: &FtConfig,
    rule: Option<&QuadratureRule>,
) -> Result<EstimationReport> {
    check_supports(rho, sigma)?;
    let (rho, sigma) = (rho.clone(), sigma.clone());
    estimate_petz_with(
        move || {
            Box::new(InProcessSource::new(rho.clone(), sigma.clone())) as Box<dyn ProbSource + Send>
        },
        alpha,
        rule,
        config,
    )
}

/// Recomputes a report's aggregate from its per-node values; used to check
/// report integrity.
pub fn recompute_aggregate(report: &EstimationReport) -> Option<f64> {
    match report.kind {
        ReportKind::Relent => report
            .rule
            .as_ref()
            .map(|rule| aggregate_relent(rule, &report.per_node)),
        ReportKind::Petz { alpha } => report
            .rule
            .as_ref()
            .map(|rule| aggregate_quasi(rule, alpha, &report.per_node).log2() / (alpha - 1.0)),
        ReportKind::Petz2 => report
            .per_node
            .first()
            .map(|node| (1.0 - node.value).log2()),
    }
}

/// Exact loss of the variational problem for in-process states at given
/// angles, with lambda either supplied or at its closed-form optimum.
/// Used by gradient tests and the barren-plateau study.
#[allow(clippy::too_many_arguments)]
pub fn exact_loss_at(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    u: &ParamCircuit,
    v: &ParamCircuit,
    t: f64,
    lambda: Option<&[f64]>,
    theta: &[f64],
    beta: &[f64],
) -> Result<f64> {
    let pt = prob_u_dagger_basis(sigma, u, theta)?;
    let pb = prob_v_basis(rho, v, beta)?;
    let pc = swap_test_probs(rho, u, theta, v, beta)?;
    let lam = match lambda {
        Some(l) => l.to_vec(),
        None => lambda_opt(&pt.probs, &pb.probs, &pc.probs, t),
    };
    Ok(loss(&lam, &pt.probs, &pb.probs, &pc.probs, t))
}
