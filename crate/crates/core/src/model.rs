//! Model parameters, the tanh correlation map, the correlation algebra for
//! diffusion and jump components, and closed-form Kou jump moments.
//!
//! State variables: spot S, instantaneous variance v and the unbounded
//! correlation driver R with rho = tanh(R). Each is driven by a diffusion
//! plus a compound-Poisson (Kou double-exponential) jump part; jumps are
//! coupled through a common factor Z with loading factors b_s, b_v, b_r.

use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter `{field}` out of range: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },
    #[error("correlation input outside [-1, 1]: {0}")]
    CorrelationDomain(f64),
    #[error("degenerate denominator in correlation formula")]
    DegenerateDenominator,
}

fn invalid(field: &'static str, message: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        field,
        message: message.into(),
    }
}

/// Local volatility multiplier Sigma_s(S, t).
#[derive(Clone)]
pub enum LocalVol {
    Constant(f64),
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl LocalVol {
    #[inline]
    pub fn value(&self, s: f64, t: f64) -> f64 {
        match self {
            LocalVol::Constant(c) => *c,
            LocalVol::Custom(f) => f(s, t),
        }
    }
}

impl std::fmt::Debug for LocalVol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LocalVol::Constant(c) => write!(f, "LocalVol::Constant({c})"),
            LocalVol::Custom(_) => write!(f, "LocalVol::Custom(..)"),
        }
    }
}

/// Scalar coefficient, either constant or piecewise constant in time
/// (value at `t` is the last breakpoint value <= t).
#[derive(Debug, Clone)]
pub enum Coeff {
    Const(f64),
    Piecewise { times: Vec<f64>, values: Vec<f64> },
}

impl Coeff {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Coeff::Const(c) => *c,
            Coeff::Piecewise { times, values } => {
                let mut v = values[0];
                for (tk, vk) in times.iter().zip(values) {
                    if *tk <= t + 1e-14 {
                        v = *vk;
                    } else {
                        break;
                    }
                }
                v
            }
        }
    }
}

impl From<f64> for Coeff {
    fn from(c: f64) -> Self {
        Coeff::Const(c)
    }
}

/// Diffusion parameters and initial state.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub r_d: f64,
    pub r_f: f64,
    pub kappa_v: Coeff,
    pub theta_v: Coeff,
    pub xi_v: f64,
    /// variance power constant, in [0, 2)
    pub a: f64,
    /// spot power constant, in [0, 2)
    pub c: f64,
    pub kappa_r: Coeff,
    pub theta_r: Coeff,
    pub xi_r: f64,
    /// constant variance/correlation-driver correlation
    pub rho_vr: f64,
    pub local_vol: LocalVol,
    pub s0: f64,
    pub v0: f64,
    pub rho0: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.s0 > 0.0) {
            return Err(invalid("S0", format!("must be > 0, got {}", self.s0)));
        }
        if !(self.v0 > 0.0) {
            return Err(invalid("v0", format!("must be > 0, got {}", self.v0)));
        }
        if !(self.rho0.abs() < 1.0) {
            return Err(invalid(
                "rho0",
                format!("must satisfy |rho0| < 1, got {}", self.rho0),
            ));
        }
        if !(self.rho_vr.abs() <= 1.0) {
            return Err(invalid(
                "rho_vr",
                format!("must lie in [-1, 1], got {}", self.rho_vr),
            ));
        }
        if !(0.0..2.0).contains(&self.a) {
            return Err(invalid("a", format!("must lie in [0, 2), got {}", self.a)));
        }
        if !(0.0..2.0).contains(&self.c) {
            return Err(invalid("c", format!("must lie in [0, 2), got {}", self.c)));
        }
        if self.xi_v < 0.0 {
            return Err(invalid("xi_v", "must be >= 0"));
        }
        if self.xi_r < 0.0 {
            return Err(invalid("xi_r", "must be >= 0"));
        }
        Ok(())
    }

    /// Initial value of the correlation driver, R0 = atanh(rho0).
    pub fn r0(&self) -> f64 {
        inverse_corr_map(self.rho0).expect("rho0 validated in (-1,1)")
    }

    /// Spot diffusion volatility sigma(S) = Sigma_s(S,t) S^c sqrt(v).
    #[inline]
    pub fn sigma_s(&self, s: f64, v: f64, t: f64) -> f64 {
        self.local_vol.value(s, t) * s.powf(self.c) * v.max(0.0).sqrt()
    }

    /// Variance diffusion volatility sigma(v) = xi_v v^a.
    #[inline]
    pub fn sigma_v(&self, v: f64) -> f64 {
        self.xi_v * v.max(0.0).powf(self.a)
    }

    /// Correlation-driver diffusion volatility sigma(R) = xi_r.
    #[inline]
    pub fn sigma_r(&self) -> f64 {
        self.xi_r
    }

    /// Whether the variance origin is unattainable, so the v = 0 row uses the
    /// equation itself as the boundary condition. For the square-root case
    /// this is the classical condition 2 kappa theta > xi^2; steeper powers
    /// (a > 1/2) kill the diffusion fast enough that the origin is never hit.
    pub fn variance_origin_unattainable(&self, t: f64) -> bool {
        if self.a > 0.5 {
            true
        } else if self.a < 0.5 {
            false
        } else {
            2.0 * self.kappa_v.at(t) * self.theta_v.at(t) > self.xi_v * self.xi_v
        }
    }
}

/// Kou double-exponential jump parameters.
///
/// Up-jumps ~ Exp(theta1) with probability p, down-jumps ~ Exp(theta2);
/// theta1 > 1 keeps the exponentiated spot integrable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KouJumpParams {
    pub phi: f64,
    pub p: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl KouJumpParams {
    pub fn new(phi: f64, p: f64, theta1: f64, theta2: f64) -> Result<Self, ModelError> {
        let k = KouJumpParams {
            phi,
            p,
            theta1,
            theta2,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn inactive() -> Self {
        KouJumpParams {
            phi: 0.0,
            p: 0.5,
            theta1: 2.0,
            theta2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.phi < 0.0 {
            return Err(invalid("phi", format!("must be >= 0, got {}", self.phi)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(invalid("p", format!("must lie in (0, 1), got {}", self.p)));
        }
        if !(self.theta1 > 1.0) {
            return Err(invalid(
                "theta1",
                format!("must be > 1, got {}", self.theta1),
            ));
        }
        if !(self.theta2 > 0.0) {
            return Err(invalid(
                "theta2",
                format!("must be > 0, got {}", self.theta2),
            ));
        }
        Ok(())
    }

    /// Mean jump size E[y] = p/theta1 - (1-p)/theta2.
    pub fn mean_jump(&self) -> f64 {
        self.p / self.theta1 - (1.0 - self.p) / self.theta2
    }

    /// E[e^y - 1]; finite because theta1 > 1.
    pub fn exp_moment(&self) -> f64 {
        self.p * self.theta1 / (self.theta1 - 1.0)
            + (1.0 - self.p) * self.theta2 / (self.theta2 + 1.0)
            - 1.0
    }

    /// E[(e^{b y} - 1) 1_{lo <= y <= hi}], in closed form. Handles b = 0 and
    /// the resonant case b = theta1 (or b = -theta2) where the integrand
    /// degenerates to a linear function.
    pub fn truncated_exp_moment(&self, b: f64, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= 0.0 && hi >= 0.0);
        let up = {
            let t = self.theta1;
            let decay = 1.0 - (-t * hi).exp();
            let shifted = if (t - b).abs() < 1e-12 {
                t * hi
            } else {
                t * (1.0 - (-(t - b) * hi).exp()) / (t - b)
            };
            shifted - decay
        };
        let down = {
            let t = self.theta2;
            let w = -lo;
            let decay = 1.0 - (-t * w).exp();
            let shifted = if (t + b).abs() < 1e-12 {
                t * w
            } else {
                t * (1.0 - (-(t + b) * w).exp()) / (t + b)
            };
            shifted - decay
        };
        self.p * up + (1.0 - self.p) * down
    }

    /// E[y 1_{lo <= y <= hi}] in closed form.
    pub fn truncated_mean(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= 0.0 && hi >= 0.0);
        let part = |t: f64, w: f64| -> f64 {
            // integral over [0, w] of y t e^{-t y} dy
            (1.0 - (1.0 + t * w) * (-t * w).exp()) / t
        };
        self.p * part(self.theta1, hi) - (1.0 - self.p) * part(self.theta2, -lo)
    }

    /// Probability mass of jumps outside [lo, hi]: (below, above).
    pub fn tail_masses(&self, lo: f64, hi: f64) -> (f64, f64) {
        debug_assert!(lo <= 0.0 && hi >= 0.0);
        let above = self.p * (-self.theta1 * hi).exp();
        let below = (1.0 - self.p) * (self.theta2 * lo).exp();
        (below, above)
    }
}

/// Per-unit-time jump variance used by the correlation formulas,
/// phi [ p / theta1^2 + (1-p) / theta2^2 ].
pub fn kou_levy_variance(k: &KouJumpParams) -> f64 {
    k.phi * (k.p / (k.theta1 * k.theta1) + (1.0 - k.p) / (k.theta2 * k.theta2))
}

/// Exponent applied to the loading factor inside Var(L_i) = Var(Y_i) + b^pow Var(Z).
///
/// `Squared` is the variance of Y + bZ for independent Y, Z; `Literal`
/// reproduces the linear-in-b bookkeeping some sources use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadingVariancePower {
    #[default]
    Squared,
    Literal,
}

/// Jump structure: three idiosyncratic Kou processes plus a common factor.
#[derive(Debug, Clone)]
pub struct JumpSpec {
    pub idio_s: KouJumpParams,
    pub idio_v: KouJumpParams,
    pub idio_r: KouJumpParams,
    pub common: KouJumpParams,
    pub b_s: f64,
    pub b_v: f64,
    pub b_r: f64,
    pub loading_power: LoadingVariancePower,
}

impl JumpSpec {
    pub fn inactive() -> Self {
        JumpSpec {
            idio_s: KouJumpParams::inactive(),
            idio_v: KouJumpParams::inactive(),
            idio_r: KouJumpParams::inactive(),
            common: KouJumpParams::inactive(),
            b_s: 0.0,
            b_v: 0.0,
            b_r: 0.0,
            loading_power: LoadingVariancePower::Squared,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.idio_s.validate()?;
        self.idio_v.validate()?;
        self.idio_r.validate()?;
        self.common.validate()
    }

    pub fn is_active(&self) -> bool {
        self.idio_s.phi > 0.0
            || self.idio_v.phi > 0.0
            || self.idio_r.phi > 0.0
            || self.common.phi > 0.0
    }

    fn loading_factor(&self, b: f64) -> f64 {
        match self.loading_power {
            LoadingVariancePower::Squared => b * b,
            LoadingVariancePower::Literal => b,
        }
    }

    /// Var(L_i) = Var(Y_i) + b_i^pow Var(Z) for i in {s, v, r}. Clamped at
    /// zero: the literal loading mode can otherwise go negative for b < 0.
    pub fn total_jump_variance(&self, driver: JumpDriver) -> f64 {
        let var_z = kou_levy_variance(&self.common);
        let (idio, b) = match driver {
            JumpDriver::Spot => (&self.idio_s, self.b_s),
            JumpDriver::Variance => (&self.idio_v, self.b_v),
            JumpDriver::Correlation => (&self.idio_r, self.b_r),
        };
        (kou_levy_variance(idio) + self.loading_factor(b) * var_z).max(0.0)
    }

    pub fn var_z(&self) -> f64 {
        kou_levy_variance(&self.common)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpDriver {
    Spot,
    Variance,
    Correlation,
}

/// rho = tanh(R); maps the unbounded driver onto (-1, 1).
#[inline]
pub fn corr_map(r: f64) -> f64 {
    r.tanh()
}

/// R = atanh(rho); defined for |rho| < 1.
pub fn inverse_corr_map(rho: f64) -> Result<f64, ModelError> {
    if rho.abs() >= 1.0 {
        return Err(ModelError::CorrelationDomain(rho));
    }
    Ok(rho.atanh())
}

/// Positive-semidefiniteness of the 3x3 correlation matrix with pairwise
/// entries (rho_t, rho_sr, rho_vr):
/// det = 1 - rho_t^2 - rho_sr^2 - rho_vr^2 + 2 rho_t rho_vr rho_sr >= -eps.
pub fn check_correlation_psd(rho_t: f64, rho_sr: f64, rho_vr: f64) -> Result<bool, ModelError> {
    const EPS_PSD: f64 = 1e-12;
    for &r in &[rho_t, rho_sr, rho_vr] {
        if !(r.abs() <= 1.0) {
            return Err(ModelError::CorrelationDomain(r));
        }
    }
    let det = correlation_det(rho_t, rho_sr, rho_vr);
    Ok(det >= -EPS_PSD)
}

pub fn correlation_det(rho_t: f64, rho_sr: f64, rho_vr: f64) -> f64 {
    1.0 - rho_t * rho_t - rho_sr * rho_sr - rho_vr * rho_vr + 2.0 * rho_t * rho_vr * rho_sr
}

/// Pairwise jump correlation b_i b_j Var(Z) / sqrt(Var(L_i) Var(L_j)).
pub fn jump_pairwise_corr(
    b_i: f64,
    b_j: f64,
    var_z: f64,
    var_i: f64,
    var_j: f64,
) -> Result<f64, ModelError> {
    if var_i <= 0.0 || var_j <= 0.0 {
        return Err(ModelError::DegenerateDenominator);
    }
    Ok(b_i * b_j * var_z / (var_i.sqrt() * var_j.sqrt()))
}

/// The three total instantaneous correlations at a state point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalCorrelations {
    pub rho_sv: f64,
    pub rho_vr: f64,
    pub rho_sr: f64,
}

/// Total instantaneous correlations combining the diffusion part (with
/// rho_t = tanh(R) and rho_sr = rho_t rho_vr) and the common-factor jump
/// part. Jump contributions scale with the state on both sides of the
/// fraction — S^2 Var(L_s), v^2 Var(L_v), Var(L_r) in the denominators and
/// the matching S v, v, S factors on the covariance terms — which is what
/// keeps every output inside [-1, 1] (Cauchy-Schwarz on the two-component
/// diffusion/jump decomposition).
pub fn total_correlations(
    state: (f64, f64, f64),
    params: &ModelParams,
    jumps: &JumpSpec,
    t: f64,
) -> Result<TotalCorrelations, ModelError> {
    let (s, v, r) = state;
    if s <= 0.0 || v <= 0.0 {
        return Err(invalid("state", "requires S > 0 and v > 0"));
    }
    let rho_t = corr_map(r);
    let sig_s = params.sigma_s(s, v, t);
    let sig_v = params.sigma_v(v);
    let sig_r = params.sigma_r();
    let var_z = jumps.var_z();
    let vl_s = s * s * jumps.total_jump_variance(JumpDriver::Spot);
    let vl_v = v * v * jumps.total_jump_variance(JumpDriver::Variance);
    let vl_r = jumps.total_jump_variance(JumpDriver::Correlation);
    let den_s = (sig_s * sig_s + vl_s).sqrt();
    let den_v = (sig_v * sig_v + vl_v).sqrt();
    let den_r = (sig_r * sig_r + vl_r).sqrt();
    if den_s == 0.0 || den_v == 0.0 || den_r == 0.0 {
        return Err(ModelError::DegenerateDenominator);
    }
    Ok(TotalCorrelations {
        rho_sv: (rho_t * sig_s * sig_v + s * v * jumps.b_s * jumps.b_v * var_z)
            / (den_s * den_v),
        rho_vr: (params.rho_vr * sig_v * sig_r + v * jumps.b_v * jumps.b_r * var_z)
            / (den_v * den_r),
        rho_sr: (rho_t * params.rho_vr * sig_s * sig_r + s * jumps.b_s * jumps.b_r * var_z)
            / (den_s * den_r),
    })
}

/// Reference parameter set used throughout the tests: a half-year FX setup
/// with strong initial variance and negative initial spot/variance
/// correlation (barriers 50 / 84.5 where a contract needs them).
pub fn reference_params() -> ModelParams {
    ModelParams {
        r_d: 0.02,
        r_f: 0.01,
        kappa_v: Coeff::Const(2.0),
        theta_v: Coeff::Const(0.1),
        xi_v: 0.3,
        a: 0.5,
        c: 1.0,
        kappa_r: Coeff::Const(0.3),
        theta_r: Coeff::Const(-0.2),
        xi_r: 5.0,
        rho_vr: 0.4,
        local_vol: LocalVol::Constant(1.0),
        s0: 65.0,
        v0: 0.5,
        rho0: -0.7,
    }
}

/// Jump table that pairs with [`reference_params`]: moderate-intensity Kou
/// jumps in all three drivers plus a common factor.
pub fn reference_jumps() -> JumpSpec {
    JumpSpec {
        idio_s: KouJumpParams::new(0.3, 0.3, 3.0, 4.0).unwrap(),
        idio_v: KouJumpParams::new(0.3, 0.4, 2.0, 3.0).unwrap(),
        idio_r: KouJumpParams::new(0.3, 0.6, 1.5, 2.0).unwrap(),
        common: KouJumpParams::new(0.3, 0.3, 3.0, 3.5).unwrap(),
        b_s: 3.0,
        b_v: 2.0,
        b_r: 5.0,
        loading_power: LoadingVariancePower::Squared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn corr_map_fixed_point_and_saturation() {
        assert_eq!(corr_map(0.0), 0.0);
        assert!((corr_map(20.0) - 1.0).abs() < 1e-15);
        assert!((corr_map(-20.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_corr_map_matches_log_identity() {
        // R0 for rho0 = -0.7: 0.5 ln((1 + rho)/(1 - rho))
        let oracle = 0.5 * (0.3_f64 / 1.7).ln();
        let r = inverse_corr_map(-0.7).unwrap();
        assert!((r - oracle).abs() < 1e-14);
        assert!((r + 0.8673).abs() < 5e-5);
        assert!(inverse_corr_map(1.0).is_err());
    }

    #[test]
    fn corr_map_round_trip() {
        for i in 0..400 {
            let r = -10.0 + i as f64 * 0.05;
            let back = inverse_corr_map(corr_map(r)).unwrap();
            assert!((back - r).abs() < 1e-12 * r.abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn psd_examples() {
        assert!(check_correlation_psd(0.0, 0.0, 0.0).unwrap());
        // rho_sr = rho_t * rho_vr factorizes the determinant
        let (rho_t, rho_vr) = (0.5, 0.4);
        let det = correlation_det(rho_t, rho_t * rho_vr, rho_vr);
        assert!((det - (1.0 - 0.25) * (1.0 - 0.16)).abs() < 1e-14);
        assert!(check_correlation_psd(rho_t, rho_t * rho_vr, rho_vr).unwrap());
        let det_bad = correlation_det(0.9, -0.9, 0.9);
        assert!((det_bad + 2.888).abs() < 1e-12);
        assert!(!check_correlation_psd(0.9, -0.9, 0.9).unwrap());
        assert!(check_correlation_psd(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn psd_holds_on_factorized_lattice() {
        for i in 0..=40 {
            for j in 0..=40 {
                let rho_t = -1.0 + i as f64 * 0.05;
                let rho_vr = -1.0 + j as f64 * 0.05;
                assert!(
                    check_correlation_psd(rho_t, rho_t * rho_vr, rho_vr).unwrap(),
                    "rho_t={rho_t} rho_vr={rho_vr}"
                );
            }
        }
    }

    #[test]
    fn kou_variance_examples() {
        let z = KouJumpParams::new(0.3, 0.3, 3.0, 3.5).unwrap();
        assert!((kou_levy_variance(&z) - 0.3 * (0.3 / 9.0 + 0.7 / 12.25)).abs() < 1e-15);
        assert!((kou_levy_variance(&z) - 0.0271429).abs() < 1e-6);
        let ls = KouJumpParams::new(0.3, 0.3, 3.0, 4.0).unwrap();
        assert!((kou_levy_variance(&ls) - 0.0231250).abs() < 1e-7);
        let none = KouJumpParams { phi: 0.0, ..ls };
        assert_eq!(kou_levy_variance(&none), 0.0);
    }

    #[test]
    fn kou_moments() {
        let ls = KouJumpParams::new(0.3, 0.3, 3.0, 4.0).unwrap();
        assert!((ls.mean_jump() - (-0.075)).abs() < 1e-15);
        assert!((ls.exp_moment() - 0.01).abs() < 1e-14);
        // truncated moments approach the full ones on a wide window
        let full = ls.exp_moment();
        let trunc = ls.truncated_exp_moment(1.0, -40.0, 40.0);
        assert!((full - trunc).abs() < 1e-12);
        let tm = ls.truncated_mean(-40.0, 40.0);
        assert!((tm - ls.mean_jump()).abs() < 1e-12);
    }

    #[test]
    fn truncated_exp_moment_resonant_branch() {
        // b equal to theta1 triggers the linear limit in the up integral
        let z = KouJumpParams::new(0.3, 0.3, 3.0, 3.5).unwrap();
        let hi = 1.5;
        let v = z.truncated_exp_moment(3.0, -2.0, hi);
        // independent quadrature oracle
        let mut acc = 0.0;
        let n = 400_000;
        for i in 0..n {
            let y = -2.0 + (hi + 2.0) * (i as f64 + 0.5) / n as f64;
            let dens = if y >= 0.0 {
                z.p * z.theta1 * (-z.theta1 * y).exp()
            } else {
                (1.0 - z.p) * z.theta2 * (z.theta2 * y).exp()
            };
            acc += ((3.0 * y).exp() - 1.0) * dens * (hi + 2.0) / n as f64;
        }
        assert!((v - acc).abs() < 1e-4, "closed form {v} vs quadrature {acc}");
    }

    #[test]
    fn jump_pairwise_corr_examples() {
        assert_eq!(jump_pairwise_corr(0.0, 2.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        let r = jump_pairwise_corr(1.0, -1.0, 1.0, 2.0, 2.0).unwrap();
        assert!((r + 0.5).abs() < 1e-15);
        // full positive correlation limit: var_i = b_i^2 var_z
        let b = 1e9;
        let r = jump_pairwise_corr(b, b, 1.0, b * b, b * b).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(jump_pairwise_corr(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn total_correlations_pure_diffusion_limit() {
        let params = reference_params();
        let jumps = JumpSpec::inactive();
        let r = inverse_corr_map(-0.7).unwrap();
        let tc = total_correlations((65.0, 0.5, r), &params, &jumps, 0.0).unwrap();
        assert!((tc.rho_sv + 0.7).abs() < 1e-12);
        assert!((tc.rho_vr - 0.4).abs() < 1e-12);
        assert!((tc.rho_sr + 0.28).abs() < 1e-12);
    }

    #[test]
    fn total_correlations_zero_loadings_strip_jump_numerators() {
        let params = reference_params();
        let mut jumps = reference_jumps();
        jumps.b_s = 0.0;
        jumps.b_v = 0.0;
        jumps.b_r = 0.0;
        let r = params.r0();
        let tc = total_correlations((65.0, 0.5, r), &params, &jumps, 0.0).unwrap();
        // numerators keep only diffusion terms; denominators still carry the
        // idiosyncratic jump variances, so magnitudes shrink
        assert!(tc.rho_sv > -0.7 && tc.rho_sv < 0.0);
        assert!(tc.rho_vr > 0.0 && tc.rho_vr < 0.4);
        let pc = jump_pairwise_corr(0.0, 0.0, jumps.var_z(), 1.0, 1.0).unwrap();
        assert_eq!(pc, 0.0);
    }

    #[test]
    fn total_correlations_reference_point_inside_unit_interval() {
        let params = reference_params();
        let jumps = reference_jumps();
        let tc = total_correlations((65.0, 0.5, params.r0()), &params, &jumps, 0.0).unwrap();
        for v in [tc.rho_sv, tc.rho_vr, tc.rho_sr] {
            assert!(v.abs() <= 1.0, "correlation {v} outside [-1,1]");
        }
    }

    #[test]
    fn kou_variance_monotonicity() {
        let base = KouJumpParams::new(0.3, 0.3, 3.0, 4.0).unwrap();
        let mut hi_phi = base;
        hi_phi.phi = 0.6;
        assert!(kou_levy_variance(&hi_phi) > kou_levy_variance(&base));
        let mut hi_t1 = base;
        hi_t1.theta1 = 5.0;
        assert!(kou_levy_variance(&hi_t1) < kou_levy_variance(&base));
        let mut hi_t2 = base;
        hi_t2.theta2 = 6.0;
        assert!(kou_levy_variance(&hi_t2) < kou_levy_variance(&base));
    }

    proptest! {
        #[test]
        fn corr_map_round_trip_prop(r in -10.0f64..10.0) {
            let back = inverse_corr_map(corr_map(r)).unwrap();
            prop_assert!((back - r).abs() < 1e-12 * r.abs().max(1.0));
        }

        #[test]
        fn total_correlations_bounded(
            s in 1.0f64..500.0,
            v in 0.01f64..4.0,
            r in -5.0f64..5.0,
            b_s in -5.0f64..5.0,
            b_v in -5.0f64..5.0,
            b_r in -5.0f64..5.0,
        ) {
            let params = reference_params();
            let mut jumps = reference_jumps();
            jumps.b_s = b_s;
            jumps.b_v = b_v;
            jumps.b_r = b_r;
            let tc = total_correlations((s, v, r), &params, &jumps, 0.0).unwrap();
            prop_assert!(tc.rho_sv.abs() <= 1.0 + 1e-9);
            prop_assert!(tc.rho_vr.abs() <= 1.0 + 1e-9);
            prop_assert!(tc.rho_sr.abs() <= 1.0 + 1e-9);
        }
    }
}
