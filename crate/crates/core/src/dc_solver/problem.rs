use serde::{Deserialize, Serialize};

use crate::domain_model::{DiscreteJointDistribution, SimplexVector};
use crate::error::{Error, Result};
use crate::predictors::{
    validate_loss_bound, Hypothesis, LossKind, LossSpec, Model, ProbabilityHypothesis, RegressionHypothesis,
};

/// Tolerance when comparing source conditionals in model R.
const CONDITIONAL_TOL: f64 = 1e-9;

/// One instance of the min-max problem over mixture weights.
///
/// Per-point data is laid out row-major as `[point * p + j]`. A point is an
/// input `x` in model R and a pair `(x, y)` (flat index `x * n_y + y`) in model P.
#[derive(Debug, Clone)]
pub struct DcProblem {
    model: Model,
    loss: LossSpec,
    eta: f64,
    p: usize,
    n_x: usize,
    n_y: usize,
    sources: Vec<DiscreteJointDistribution>,
    hypotheses: Vec<Hypothesis>,
    labels: Vec<f64>,
    n_points: usize,
    u: f64,
    mass: Vec<f64>,
    hval: Vec<f64>,
    // Model R: pooled conditional mean and variance of the label at each x.
    cond_mean: Vec<f64>,
    cond_var: Vec<f64>,
    // Model R: coefficient of the log K_z term, 2 max_k (h_k(x) - m(x))^2.
    convexifier: Vec<f64>,
}

/// `u_k(z)`, `v_k(z)` for every source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UvValues {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl DcProblem {
    /// Validates shapes, the loss bound and (model R) conditional agreement.
    pub fn new(
        loss: LossSpec,
        sources: Vec<DiscreteJointDistribution>,
        hypotheses: Vec<Hypothesis>,
        labels: Vec<f64>,
        eta: f64,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::NonpositiveEta(eta));
        }
        let p = sources.len();
        if p == 0 || hypotheses.len() != p {
            return Err(Error::ShapeMismatch(format!("{p} sources but {} hypotheses", hypotheses.len())));
        }
        let (n_x, n_y) = sources[0].shape();
        if sources.iter().any(|d| d.shape() != (n_x, n_y)) {
            return Err(Error::ShapeMismatch("sources differ in shape".into()));
        }
        let model = hypotheses[0].model();
        if hypotheses.iter().any(|h| h.model() != model) {
            return Err(Error::ModelMismatch("hypotheses mix the two models".into()));
        }
        match (model, loss.kind) {
            (Model::Regression, LossKind::Squared) | (Model::Probability, LossKind::CrossEntropy) => {}
            _ => return Err(Error::ModelMismatch(format!("{:?} loss in model {model:?}", loss.kind))),
        }
        let shapes_ok = hypotheses.iter().all(|h| match h {
            Hypothesis::Regression(r) => r.n_x() == n_x,
            Hypothesis::Probability(q) => q.shape() == (n_x, n_y),
        });
        if !shapes_ok || (model == Model::Regression && labels.len() != n_y) {
            return Err(Error::ShapeMismatch("hypotheses or labels do not match the sources".into()));
        }
        validate_loss_bound(&loss, &sources, &hypotheses, &labels)?;

        let mut prob = DcProblem {
            model,
            loss,
            eta,
            p,
            n_x,
            n_y,
            sources,
            hypotheses,
            labels,
            n_points: 0,
            u: 0.0,
            mass: Vec::new(),
            hval: Vec::new(),
            cond_mean: Vec::new(),
            cond_var: Vec::new(),
            convexifier: Vec::new(),
        };
        match model {
            Model::Regression => prob.build_regression()?,
            Model::Probability => prob.build_probability()?,
        }
        Ok(prob)
    }

    fn build_regression(&mut self) -> Result<()> {
        let (n_x, n_y, p) = (self.n_x, self.n_y, self.p);
        let marginals: Vec<Vec<f64>> = self.sources.iter().map(DiscreteJointDistribution::marginal_x).collect();
        self.n_points = n_x;
        self.u = 1.0 / n_x as f64;
        self.mass = vec![0.0; n_x * p];
        self.hval = vec![0.0; n_x * p];
        self.cond_mean = vec![0.0; n_x];
        self.cond_var = vec![0.0; n_x];
        for x in 0..n_x {
            let mut pooled = vec![0.0; n_y];
            let mut reference: Option<Vec<f64>> = None;
            for (j, d) in self.sources.iter().enumerate() {
                self.mass[x * p + j] = marginals[j][x];
                let Hypothesis::Regression(h) = &self.hypotheses[j] else { unreachable!() };
                self.hval[x * p + j] = h.value(x);
                if marginals[j][x] > 0.0 {
                    let cond: Vec<f64> = d.row(x).iter().map(|v| v / marginals[j][x]).collect();
                    if let Some(r) = &reference {
                        if r.iter().zip(&cond).any(|(a, b)| (a - b).abs() > CONDITIONAL_TOL) {
                            return Err(Error::ConditionalMismatch { x });
                        }
                    } else {
                        reference = Some(cond);
                    }
                    pooled.iter_mut().zip(d.row(x)).for_each(|(a, b)| *a += b);
                }
            }
            let total: f64 = pooled.iter().sum();
            let cond: Vec<f64> = if total > 0.0 {
                pooled.iter().map(|v| v / total).collect()
            } else {
                vec![1.0 / n_y as f64; n_y]
            };
            let mean: f64 = cond.iter().zip(&self.labels).map(|(c, l)| c * l).sum();
            let var: f64 = cond.iter().zip(&self.labels).map(|(c, l)| c * (l - mean) * (l - mean)).sum();
            self.cond_mean[x] = mean;
            self.cond_var[x] = var;
        }
        self.convexifier = (0..n_x)
            .map(|x| {
                let worst = self.hval[x * p..(x + 1) * p].iter().map(|h| (h - self.cond_mean[x]).powi(2)).fold(0.0, f64::max);
                2.0 * worst
            })
            .collect();
        Ok(())
    }

    fn build_probability(&mut self) -> Result<()> {
        let (n, p) = (self.n_x * self.n_y, self.p);
        self.n_points = n;
        self.u = 1.0 / n as f64;
        self.mass = vec![0.0; n * p];
        self.hval = vec![0.0; n * p];
        for (j, (d, h)) in self.sources.iter().zip(&self.hypotheses).enumerate() {
            let Hypothesis::Probability(h) = h else { unreachable!() };
            for i in 0..n {
                self.mass[i * p + j] = d.as_slice()[i];
                self.hval[i * p + j] = h.values()[i];
            }
        }
        // J_z >= (ηU/p) Σ_j h_j, so J_z > 0 for every z iff some h_j is positive.
        for i in 0..n {
            if self.hval[i * p..(i + 1) * p].iter().all(|v| *v <= 0.0) {
                return Err(Error::NonpositiveJz { point: i });
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn loss(&self) -> LossSpec {
        self.loss
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    pub fn sources(&self) -> &[DiscreteJointDistribution] {
        &self.sources
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Number of evaluation points: `n_x` in model R, `n_x * n_y` in model P.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Same problem with a different smoothing parameter.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::NonpositiveEta(eta));
        }
        Ok(Self { eta, ..self.clone() })
    }

    fn check_z(&self, z: &SimplexVector) -> Result<()> {
        if z.len() != self.p {
            return Err(Error::ShapeMismatch(format!("z has {} entries, expected {}", z.len(), self.p)));
        }
        Ok(())
    }

    #[inline]
    fn jk(&self, z: &[f64], i: usize) -> (f64, f64) {
        let eu = self.eta * self.u;
        let mut j = 0.0;
        let mut k = eu;
        let mut hsum = 0.0;
        for (c, zc) in z.iter().enumerate() {
            let d = self.mass[i * self.p + c];
            let h = self.hval[i * self.p + c];
            j += zc * d * h;
            k += zc * d;
            hsum += h;
        }
        (j + eu / self.p as f64 * hsum, k)
    }

    /// `(J_z, K_z)` at one point; `h_z^η = J_z / K_z` there.
    pub fn eval_jz_kz(&self, z: &SimplexVector, point: usize) -> Result<(f64, f64)> {
        self.check_z(z)?;
        if point >= self.n_points {
            return Err(Error::InvalidArgument(format!("point {point} out of range")));
        }
        Ok(self.jk(z.as_slice(), point))
    }

    /// The combined predictor `h_z^η` evaluated from `J_z / K_z`.
    pub fn combined(&self, z: &SimplexVector) -> Result<Hypothesis> {
        self.check_z(z)?;
        let values: Vec<f64> = (0..self.n_points)
            .map(|i| {
                let (j, k) = self.jk(z.as_slice(), i);
                j / k
            })
            .collect();
        Ok(match self.model {
            Model::Regression => RegressionHypothesis::new(values)?.into(),
            Model::Probability => ProbabilityHypothesis::from_parts(self.n_x, self.n_y, values).into(),
        })
    }

    /// Pointwise expected loss at a point in model R: `E[(h - y)^2 | x]`.
    #[inline]
    fn ell(&self, x: usize, h: f64) -> f64 {
        let e = h - self.cond_mean[x];
        e * e + self.cond_var[x]
    }

    /// `L(D_k, h_z^η)` for every k.
    pub fn domain_losses(&self, z: &SimplexVector) -> Result<Vec<f64>> {
        self.check_z(z)?;
        Ok(self.losses_raw(z.as_slice()))
    }

    fn losses_raw(&self, z: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut out = vec![0.0; p];
        for i in 0..self.n_points {
            let (j, k) = self.jk(z, i);
            let pointwise = match self.model {
                Model::Regression => self.ell(i, j / k),
                Model::Probability => (k / j).ln(),
            };
            for (c, o) in out.iter_mut().enumerate() {
                let d = self.mass[i * p + c];
                if d > 0.0 {
                    *o += d * pointwise;
                }
            }
        }
        out
    }

    /// `γ = max_k [L(D_k, h_z) − Σ_j z_j L(D_j, h_z)]` and its first maximizer.
    pub fn objective(&self, z: &SimplexVector) -> Result<(f64, usize)> {
        let losses = self.domain_losses(z)?;
        Ok(gamma_of(z.as_slice(), &losses))
    }

    /// `u_k(z)` and `v_k(z)` for every k.
    pub fn uv(&self, z: &SimplexVector) -> Result<UvValues> {
        self.check_z(z)?;
        Ok(self.uv_raw(z.as_slice(), true))
    }

    /// `u_k(z)` for every k.
    pub(crate) fn u_raw(&self, z: &[f64]) -> Vec<f64> {
        self.uv_raw(z, false).u
    }

    fn uv_raw(&self, z: &[f64], with_v: bool) -> UvValues {
        let p = self.p;
        let eu = self.eta * self.u;
        let mut u = vec![0.0; p];
        let mut v = vec![0.0; if with_v { p } else { 0 }];
        for i in 0..self.n_points {
            let (j, k) = self.jk(z, i);
            let log_k = k.ln();
            match self.model {
                Model::Regression => {
                    let ell = self.ell(i, j / k);
                    let conv = self.convexifier[i];
                    let shared = ell - conv * log_k;
                    for c in 0..p {
                        let w = self.mass[i * p + c] + eu;
                        u[c] += w * shared;
                        if with_v {
                            v[c] += k * ell - w * conv * log_k;
                        }
                    }
                }
                Model::Probability => {
                    let log_j = j.ln();
                    let kl = k * (log_k - log_j);
                    for c in 0..p {
                        let w = self.mass[i * p + c] + eu;
                        u[c] -= w * log_j;
                        if with_v {
                            v[c] += kl - w * log_k;
                        }
                    }
                }
            }
        }
        UvValues { u, v }
    }

    /// `∇u_k(z)` as a length-`p` vector of partial derivatives.
    pub fn grad_u(&self, k: usize, z: &SimplexVector) -> Result<Vec<f64>> {
        self.check_z(z)?;
        self.check_k(k)?;
        Ok(self.grad_u_raw(k, z.as_slice()))
    }

    /// `∇v_k(z)` as a length-`p` vector of partial derivatives.
    pub fn grad_v(&self, k: usize, z: &SimplexVector) -> Result<Vec<f64>> {
        self.check_z(z)?;
        self.check_k(k)?;
        Ok(self.grad_v_all_raw(z.as_slice()).swap_remove(k))
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k >= self.p {
            return Err(Error::InvalidArgument(format!("domain index {k} out of range for p = {}", self.p)));
        }
        Ok(())
    }

    pub(crate) fn grad_u_raw(&self, k_dom: usize, z: &[f64]) -> Vec<f64> {
        let p = self.p;
        let eu = self.eta * self.u;
        let mut g = vec![0.0; p];
        for i in 0..self.n_points {
            let (j, k) = self.jk(z, i);
            let c = self.mass[i * p + k_dom] + eu;
            match self.model {
                Model::Regression => {
                    let h = j / k;
                    let r = 2.0 * (h - self.cond_mean[i]);
                    let conv = self.convexifier[i];
                    for (col, gj) in g.iter_mut().enumerate() {
                        let d = self.mass[i * p + col];
                        let a = d * self.hval[i * p + col];
                        *gj += c * (r * (a - h * d) - conv * d) / k;
                    }
                }
                Model::Probability => {
                    for (col, gj) in g.iter_mut().enumerate() {
                        let a = self.mass[i * p + col] * self.hval[i * p + col];
                        *gj -= c * a / j;
                    }
                }
            }
        }
        g
    }

    /// `∇v_k(z)` for every k; row k is the gradient of `v_k`.
    pub(crate) fn grad_v_all_raw(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let p = self.p;
        let eu = self.eta * self.u;
        // v_k = A(z) + B_k(z) where A is shared; B_k depends on k through c_k.
        let mut shared = vec![0.0; p];
        let mut per_k = vec![vec![0.0; p]; p];
        for i in 0..self.n_points {
            let (j, k) = self.jk(z, i);
            match self.model {
                Model::Regression => {
                    let h = j / k;
                    let m = self.cond_mean[i];
                    let s = self.cond_var[i] + m * m;
                    let conv = self.convexifier[i];
                    for col in 0..p {
                        let d = self.mass[i * p + col];
                        let a = d * self.hval[i * p + col];
                        shared[col] += 2.0 * (h - m) * a + (s - h * h) * d;
                        if d != 0.0 {
                            for (kd, row) in per_k.iter_mut().enumerate() {
                                let c = self.mass[i * p + kd] + eu;
                                row[col] -= conv * c * d / k;
                            }
                        }
                    }
                }
                Model::Probability => {
                    let h = j / k;
                    let log_ratio = (k / j).ln();
                    for col in 0..p {
                        let d = self.mass[i * p + col];
                        if d == 0.0 {
                            continue;
                        }
                        let hj = self.hval[i * p + col];
                        shared[col] += d * (log_ratio + 1.0 - hj / h);
                        for (kd, row) in per_k.iter_mut().enumerate() {
                            let c = self.mass[i * p + kd] + eu;
                            row[col] -= c * d / k;
                        }
                    }
                }
            }
        }
        per_k
            .into_iter()
            .map(|row| row.iter().zip(&shared).map(|(a, b)| a + b).collect())
            .collect()
    }
}

/// `(γ, argmax)` from per-domain losses; ties go to the smallest index.
pub(crate) fn gamma_of(z: &[f64], losses: &[f64]) -> (f64, usize) {
    let avg: f64 = z.iter().zip(losses).map(|(a, b)| a * b).sum();
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, l) in losses.iter().enumerate() {
        let s = l - avg;
        if s > best.0 {
            best = (s, k);
        }
    }
    best
}
